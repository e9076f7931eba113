"""Headless figure rendering for the sweep and rate reports.

One PNG per (divergence, dimension) pair for sweeps -- mean estimate over
trials against lambda, one error-barred line per (N, proposal), closed-form
truth dashed where available -- and a log-log bias-decay panel for rate
studies.  Non-finite estimates are dropped from the plots (the CSV keeps
them); a cell whose every trial overflowed simply leaves a gap.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["render_sweep_figures", "render_rates_figure"]


def _safe(label: str) -> str:
    return label.replace(":", "-")


def render_sweep_figures(records, stem) -> list[Path]:
    """Write ``<stem>_<divergence>_d<d>.png`` files; returns the paths."""
    stem = Path(stem)
    records = list(records)
    paths = []
    for div, d in sorted({(r.divergence, r.d) for r in records}):
        sub = [r for r in records if r.divergence == div and r.d == d]
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for n_comp, prop in sorted({(r.N, r.proposal) for r in sub}):
            lams, means, stds = [], [], []
            for lam in sorted({r.lam for r in sub}):
                ests = np.array([r.estimate for r in sub
                                 if r.N == n_comp and r.proposal == prop and r.lam == lam])
                ests = ests[np.isfinite(ests)]
                if ests.size == 0:
                    continue
                lams.append(lam)
                means.append(float(np.mean(ests)))
                stds.append(float(np.std(ests, ddof=1)) if ests.size > 1 else 0.0)
            if lams:
                ax.errorbar(lams, means, yerr=stds, marker="o", markersize=3,
                            capsize=2, linewidth=1.0,
                            label=f"N={n_comp}, {prop}")
        truth_pts = sorted({(r.lam, r.truth) for r in sub
                            if r.truth is not None and np.isfinite(r.truth)})
        if truth_pts:
            ax.plot([t[0] for t in truth_pts], [t[1] for t in truth_pts],
                    "k--", linewidth=1.2, label="closed form")
        ax.set_xlabel(r"$\lambda$")
        ax.set_ylabel("estimate")
        ax.set_title(f"{div}, d={d}")
        ax.legend(fontsize=7)
        fig.tight_layout()
        path = stem.parent / f"{stem.name}_{_safe(div)}_d{d}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths


def render_rates_figure(report: dict, path) -> Path:
    """Log-log |bias| against N with the fitted slope line and, when present,
    the exact chi-square c/N prediction from the report dictionary."""
    path = Path(path)
    ns = np.array([row["N"] for row in report["bias"]], dtype=float)
    bias = np.array([row["bias"] for row in report["bias"]], dtype=float)
    se = np.array([row["se"] for row in report["bias"]], dtype=float)
    mask = np.isfinite(bias) & (np.abs(bias) > 0)

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.errorbar(ns[mask], np.abs(bias[mask]), yerr=se[mask], fmt="o",
                markersize=4, capsize=2, label="measured |bias|")
    slope = report.get("slope")
    if slope is not None and mask.sum() >= 2:
        anchor = np.abs(bias[mask][0]) / ns[mask][0] ** slope
        grid = np.geomspace(ns[mask][0], ns[mask][-1], 64)
        ax.plot(grid, anchor * grid ** slope, "-", linewidth=1.0,
                label=f"fit slope {slope:.3f}")
    pred = report.get("chi2_prediction")
    if pred is not None and np.isfinite(pred.get("c", np.inf)):
        grid = np.geomspace(ns[mask][0], ns[mask][-1], 64) if mask.any() else np.geomspace(1, 64, 64)
        ax.plot(grid, pred["c"] / grid, ":", linewidth=1.2,
                label="exact c/N prediction")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("|bias|")
    ax.set_title(f"{report['divergence']}, d={report['d']}, "
                 f"$\\lambda$={report['lambda']:g}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
