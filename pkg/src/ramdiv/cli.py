"""Command-line interface.

Subcommands
-----------
estimate      one divergence on the synthetic model: per-trial estimates,
              mean, standard deviation, closed-form truth when available
synthetic     full sweep over (divergence, d, lambda, N, M, proposal) grids,
              written as CSV or JSON, with PNG figures rendered alongside
rates         bias-vs-N decay study with a fitted log-log slope, checked
              against reference rate bands; JSON report plus a PNG panel
check-lemmas  grid scan verifying the derivative-squared bounds h_delta(x)
              >= f0'(x)^2 on [delta, infinity) for every supported kind

Exit codes: 0 success; 1 usage or I/O error; 2 run completed but produced
non-finite values (an infinite truth or an overflowed estimate).  The master
seed comes from --seed, else the RAMDIV_SEED environment variable, else 0.
Every subcommand is a deterministic function of its flags; --threads changes
wall time only, never output bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import RamdivError, UsageError
from .experiments import (INPUT_DIM, REFERENCE_RATES, SweepConfig, bias_curve,
                          chi2_bias_prediction, default_proposal, fit_log_slope,
                          make_family, model_at, rate_key, run_sweep)
from .fdiv import (CLOSED_FORM_KINDS, closed_form, dominance_margins,
                   parse_divergence)
from .gaussian import standard_normal
from .mixture import ProposalChoice, build_mixture, ram_mc
from .streams import child_seed, stream

__all__ = ["CliConfig", "main", "entry_point",
           "cmd_estimate", "cmd_synthetic", "cmd_rates", "cmd_check_lemmas"]

DEFAULT_LAMBDAS = "-2,-1.5,-1,-0.5,0,0.5,1,1.5,2"
CHECK_LEMMAS_DIVERGENCES = ("kl,sqhellinger,js,falpha:-0.5,falpha:0,falpha:0.5,"
                            "fbeta:0.75,fbeta:1.5,fbeta:4")

# Slope acceptance bands for the rates study, per divergence kind.  chisq has
# an exact 1/N decay, so it is pinned two-sided; the kl bias decays at least
# as fast as N^-1/2 under either reference route, hence one-sided.
SLOPE_BANDS = {"chisq": (-1.15, -0.85), "kl": (None, -0.5)}


@dataclass(frozen=True)
class CliConfig:
    """Parsed invocation: subcommand, resolved flags, output destination.

    The master seed inside ``flags`` is always concrete by construction:
    --seed wins, then RAMDIV_SEED, then 0.
    """

    subcommand: str
    flags: dict
    output_path: str | None
    format: str | None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        flags = {k: v for k, v in vars(args).items()
                 if k not in ("func", "subcommand", "output", "format")}
        if "seed" in flags and flags["seed"] is None:
            env = os.environ.get("RAMDIV_SEED")
            if env is not None:
                try:
                    flags["seed"] = int(env)
                except ValueError:
                    raise UsageError(f"RAMDIV_SEED must be an integer, got {env!r}")
            else:
                flags["seed"] = 0
        return cls(subcommand=args.subcommand, flags=flags,
                   output_path=getattr(args, "output", None),
                   format=getattr(args, "format", None))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _int_list(text: str, name: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"{name} must be a comma list of integers, got {text!r}")
    if not values:
        raise UsageError(f"{name} must be nonempty")
    return values


def _float_list(text: str, name: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"{name} must be a comma list of reals, got {text!r}")
    if not values:
        raise UsageError(f"{name} must be nonempty")
    return values


def _check_threads(threads: int) -> int:
    if threads < 1:
        raise UsageError(f"--threads must be >= 1, got {threads}")
    return threads


def _record_nonfinite(records) -> int:
    bad = 0
    for r in records:
        if not math.isfinite(r.estimate):
            bad += 1
        elif r.truth is not None and not math.isfinite(r.truth):
            bad += 1
    return bad


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------

def cmd_estimate(cfg: CliConfig) -> int:
    f = cfg.flags
    spec = parse_divergence(f["divergence"])
    if f["noise_std"] <= 0.0:
        raise UsageError(f"--noise-std must be positive, got {f['noise_std']}")
    proposal = ProposalChoice.parse(f["proposal"])
    seed = f["seed"]
    fam = make_family(f["d"], child_seed(seed, "family", f["d"]), eps=f["noise_std"])
    model = model_at(fam, f["lam"])
    prior = standard_normal(f["d"])
    truth = None
    if spec.kind in CLOSED_FORM_KINDS:
        from .gaussian import marginal
        truth = closed_form(spec, marginal(model), prior)

    print(f"divergence={spec.label()} d={f['d']} lambda={f['lam']:g} N={f['N']} "
          f"M={f['M']} proposal={proposal.value} trials={f['trials']} seed={seed} "
          f"noise_std={f['noise_std']:g}")
    print("trial,seed,estimate")
    estimates = []
    for trial in range(f["trials"]):
        tseed = child_seed(seed, "estimate", spec.label(), f["d"], float(f["lam"]),
                           f["N"], f["M"], proposal.value, trial)
        rng = np.random.default_rng(tseed)
        xs = rng.standard_normal((f["N"], INPUT_DIM))
        mix = build_mixture(model, xs)
        est = ram_mc(spec, mix, prior, f["M"], proposal, rng)
        estimates.append(est.value)
        print(f"{trial},{tseed},{_fmt(est.value)}")

    arr = np.asarray(estimates)
    finite = arr[np.isfinite(arr)]
    mean = float(np.mean(arr)) if arr.size else math.nan
    sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    print(f"mean={_fmt(mean)}")
    print(f"sd={_fmt(sd)}")
    print("truth=unavailable" if truth is None else f"truth={_fmt(truth)}")

    bad = int(np.sum(~np.isfinite(arr)))
    if truth is not None and not math.isfinite(truth):
        bad += 1
    if bad:
        print(f"NonFinite: {bad} value(s) "
              f"({arr.size - finite.size} estimate(s), truth "
              f"{'finite' if truth is None or math.isfinite(truth) else 'infinite'})")
        return 2
    return 0


# ---------------------------------------------------------------------------
# synthetic
# ---------------------------------------------------------------------------

def cmd_synthetic(cfg: CliConfig) -> int:
    from .figures import render_sweep_figures
    from .reporting import records_to_csv, records_to_json

    f = cfg.flags
    labels = [s.strip() for s in f["divergences"].split(",") if s.strip()]
    if not labels:
        raise UsageError("--divergences must name at least one divergence")
    for label in labels:
        parse_divergence(label)
    proposals = [ProposalChoice.parse(s.strip()).value
                 for s in f["proposals"].split(",") if s.strip()]
    if not proposals:
        raise UsageError("--proposals must name at least one proposal")
    sweep = SweepConfig(
        divergences=tuple(labels),
        dims=tuple(_int_list(f["dims"], "--dims")),
        lambdas=tuple(_float_list(f["lambdas"], "--lambdas")),
        Ns=tuple(_int_list(f["Ns"], "--Ns")),
        Ms=tuple(_int_list(f["Ms"], "--Ms")),
        proposals=tuple(proposals),
        trials=f["trials"],
        master_seed=f["seed"],
    )
    records = run_sweep(sweep, workers=_check_threads(f["threads"]))

    out = Path(cfg.output_path)
    text = records_to_csv(records) if cfg.format == "csv" else records_to_json(records)
    out.write_text(text)
    print(f"wrote {len(records)} records to {out}")
    if not f["no_figures"]:
        for fig_path in render_sweep_figures(records, out.parent / out.stem):
            print(f"wrote figure {fig_path}")

    bad = _record_nonfinite(records)
    if bad:
        print(f"NonFinite: {bad} record(s)")
        return 2
    return 0


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------

def _reference_line(key: str) -> str:
    parts = []
    chi2 = REFERENCE_RATES.bias_rates_chi2_moment[key]
    fourth = REFERENCE_RATES.bias_rates_fourth_moment[key]
    if chi2 is not None:
        parts.append(f"{chi2} (chi2-moment route)")
    if fourth is not None:
        parts.append(f"{fourth} (fourth-moment route)")
    return " / ".join(parts) if parts else "none"


def _slope_verdict(kind: str, slope) -> tuple:
    band = SLOPE_BANDS.get(kind)
    if band is None:
        return None, None
    if slope is None:
        return band, False
    lo, hi = band
    ok = (lo is None or slope >= lo) and (slope <= hi)
    return band, bool(ok)


def cmd_rates(cfg: CliConfig) -> int:
    from .figures import render_rates_figure

    f = cfg.flags
    spec = parse_divergence(f["divergence"])
    ns = _int_list(f["Ns"], "--Ns")
    if len(ns) != len(set(ns)) or any(n < 1 for n in ns):
        raise UsageError("--Ns must be distinct positive integers")
    if len(ns) < 3:
        raise UsageError(f"need at least 3 values of N to fit a decay slope, got {len(ns)}")
    ns = sorted(ns)
    key = rate_key(spec)

    report = {
        "divergence": spec.label(), "d": f["d"], "lambda": f["lam"], "M": f["M"],
        "trials": f["trials"], "Ns": ns, "seed": f["seed"],
        "reference": _reference_line(key),
        "reference_rates": {
            "chi2_moment_route": REFERENCE_RATES.bias_rates_chi2_moment[key],
            "fourth_moment_route": REFERENCE_RATES.bias_rates_fourth_moment[key],
            "concentration": REFERENCE_RATES.psi_rates[key],
        },
        "self_test": bool(f["self_test"]),
    }

    if f["self_test"]:
        # Synthetic exact-decay data: bias(N) = 1/N, so the fitted slope must
        # come out at -1 regardless of the sampled grid.
        report["proposal"] = "none"
        rows = [{"N": n, "bias": 1.0 / n, "se": 0.0} for n in ns]
        slope = fit_log_slope(ns, [row["bias"] for row in rows])
        report["bias"] = rows
        report["slope"] = slope
        band, passes = _slope_verdict("chisq", slope)
        report["band"] = band
        report["passes"] = passes
        exit_code = 0
    else:
        if spec.kind not in CLOSED_FORM_KINDS:
            raise UsageError("the bias study needs a closed-form truth; "
                             f"choose one of {', '.join(CLOSED_FORM_KINDS)}")
        proposal = (default_proposal(spec) if f["proposal"] == "auto"
                    else ProposalChoice.parse(f["proposal"]))
        report["proposal"] = proposal.value
        sweep = SweepConfig(divergences=(spec.label(),), dims=(f["d"],),
                            lambdas=(f["lam"],), Ns=tuple(ns), Ms=(f["M"],),
                            proposals=(proposal.value,), trials=f["trials"],
                            master_seed=f["seed"])
        records = run_sweep(sweep, workers=_check_threads(f["threads"]))
        bad = _record_nonfinite(records)
        report["non_finite_records"] = bad
        if bad:
            report["bias"] = []
            report["slope"] = None
            report["band"] = SLOPE_BANDS.get(spec.kind)
            report["passes"] = False
            exit_code = 2
        else:
            curve = bias_curve(records)
            report["bias"] = [{"N": n, "bias": b, "se": se} for n, b, se in curve]
            report["truth"] = records[0].truth
            try:
                slope = fit_log_slope([n for n, _, _ in curve],
                                      [abs(b) for _, b, _ in curve])
            except RamdivError:
                slope = None
            report["slope"] = slope
            band, passes = _slope_verdict(spec.kind, slope)
            report["band"] = band
            report["passes"] = passes
            if spec.kind == "chisq":
                fam = make_family(f["d"], child_seed(f["seed"], "family", f["d"]))
                model = model_at(fam, f["lam"])
                pred = chi2_bias_prediction(model, standard_normal(f["d"]),
                                            n_x=f["prediction_samples"],
                                            rng=stream(f["seed"], "prediction",
                                                       f["d"], float(f["lam"])))
                rows = []
                for n, b, _ in curve:
                    p = pred(n)
                    rows.append({"N": n, "predicted": p,
                                 "ratio": (b / p if p not in (0.0, math.inf) else None)})
                report["chi2_prediction"] = {"c": pred.c, "rows": rows}
            exit_code = 0

    out = Path(cfg.output_path)
    out.write_text(json.dumps(report, indent=2) + "\n")
    print(f"wrote report to {out}")
    if not f["no_figures"] and report["bias"]:
        fig_path = render_rates_figure(report, out.parent / (out.stem + ".png"))
        print(f"wrote figure {fig_path}")
    slope = report.get("slope")
    print(f"slope={'n/a' if slope is None else format(slope, '.4f')} "
          f"band={report['band']} passes={report['passes']}")
    if exit_code == 2:
        print(f"NonFinite: {report['non_finite_records']} record(s)")
    return exit_code


# ---------------------------------------------------------------------------
# check-lemmas
# ---------------------------------------------------------------------------

def cmd_check_lemmas(cfg: CliConfig) -> int:
    f = cfg.flags
    deltas = _float_list(f["deltas"], "--deltas")
    labels = [s.strip() for s in f["divergences"].split(",") if s.strip()]
    if not labels:
        raise UsageError("--divergences must name at least one divergence")
    worst = math.inf
    for label in labels:
        spec = parse_divergence(label)
        for delta in deltas:
            _, margins = dominance_margins(spec, delta,
                                           grid_points=f["grid_points"],
                                           x_max=f["x_max"],
                                           bound_scale=f["bound_scale"])
            low = float(np.min(margins))
            worst = min(worst, low)
            print(f"{spec.label():<14} delta={delta:<8g} min_margin={low: .6e}")
    if worst >= -1e-12:
        print(f"OK: h_delta(x) - f0'(x)^2 >= {-1e-12:g} everywhere scanned")
        return 0
    print(f"VIOLATION: worst margin {worst:.6e} below -1e-12")
    return 1


# ---------------------------------------------------------------------------
# parser / dispatch
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ramdiv",
        description="Mixture-based f-divergence estimation on a synthetic "
                    "linear-Gaussian benchmark.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("estimate", help="single-cell estimates with summary")
    p.add_argument("--divergence", required=True,
                   help="kl | tv | chisq | sqhellinger | js | fbeta:B | falpha:A")
    p.add_argument("--d", type=int, required=True, help="latent dimension")
    p.add_argument("--lambda", dest="lam", type=float, required=True,
                   help="family interpolation parameter")
    p.add_argument("--N", type=int, required=True, help="mixture components")
    p.add_argument("--M", type=int, required=True, help="Monte-Carlo samples")
    p.add_argument("--proposal", choices=["prior", "mixture"], default="mixture")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise-std", dest="noise_std", type=float, default=0.5,
                   help="conditional noise scale eps (default 0.5)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("synthetic", help="grid sweep to CSV/JSON plus figures")
    p.add_argument("--divergences", default="kl,tv,chisq,sqhellinger,js")
    p.add_argument("--dims", default="1,4,16")
    p.add_argument("--lambdas", default=DEFAULT_LAMBDAS,
                   help="comma list; use --lambdas=-2,0,2 when the first "
                        "entry is negative")
    p.add_argument("--Ns", default="1,500")
    p.add_argument("--Ms", default="128")
    p.add_argument("--proposals", default="mixture")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", default="synthetic.csv")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--no-figures", dest="no_figures", action="store_true")
    p.set_defaults(func=cmd_synthetic)

    p = sub.add_parser("rates", help="bias decay in N against reference rates")
    p.add_argument("--divergence", default="chisq")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--Ns", default="1,2,4,8,16,32,64")
    p.add_argument("--M", type=int, default=8192)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--proposal", default="auto",
                   choices=["auto", "prior", "mixture"])
    p.add_argument("--prediction-samples", dest="prediction_samples",
                   type=int, default=200000,
                   help="X draws for the exact-decay constant (chisq only)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", default="rates.json")
    p.add_argument("--no-figures", dest="no_figures", action="store_true")
    p.add_argument("--self-test", dest="self_test", action="store_true",
                   help="fit synthetic exact 1/N data instead of estimates")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("check-lemmas",
                       help="scan h_delta(x) >= f0'(x)^2 on a log grid")
    p.add_argument("--deltas", default="0.1,0.01")
    p.add_argument("--grid-points", dest="grid_points", type=int, default=10000)
    p.add_argument("--x-max", dest="x_max", type=float, default=100.0)
    p.add_argument("--bound-scale", dest="bound_scale", type=float, default=1.0,
                   help="multiply h_delta by this factor (negative-control hook)")
    p.add_argument("--divergences", default=CHECK_LEMMAS_DIVERGENCES)
    p.set_defaults(func=cmd_check_lemmas)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if exc.code is not None else 0
        return 0 if code == 0 else 1
    try:
        cfg = CliConfig.from_args(args)
        return args.func(cfg)
    except RamdivError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())
