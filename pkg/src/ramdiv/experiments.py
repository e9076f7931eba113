"""Synthetic benchmark family, sweep runner, rate fitting and information estimators.

The synthetic ground-truth family: inputs x ~ N(0, I_20) feed a linear
conditional z | x ~ N(A_lam x + b_lam, eps^2 I_d) with

    A_lam = 0.5 * A1 + lam * A0,      b_lam = lam * v,

where A1 has ones on its main diagonal, A0 is an i.i.d.-normal matrix scaled
to unit Frobenius norm, v is a uniform unit vector and eps = 0.5.  A0 and v
are sampled exactly once per dimension (fixed by the family seed), so a
sweep over lam moves smoothly through models whose exact marginal
N(b, A A^T + eps^2 I) -- and hence closed-form truth for kl/chisq/
sqhellinger -- is available.

``run_sweep`` evaluates the mixture estimator over a grid of
(divergence, d, lam, N, M, proposal) cells; every (cell, trial) derives its
own random stream from the master seed by content hashing, so results are
reproducible, independent of worker count, and stable under grid extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionError, DomainError, UsageError
from .fdiv import CLOSED_FORM_KINDS, DivergenceSpec, closed_form, parse_divergence
from .gaussian import (DiagonalGaussian, LinearGaussianModel, marginal,
                       mean_and_covariance, standard_normal)
from .mixture import FiniteMixture, ProposalChoice, build_mixture, ram_mc
from .streams import child_seed

__all__ = [
    "INPUT_DIM",
    "SyntheticFamily",
    "SweepConfig",
    "EstimateRecord",
    "RateTable",
    "REFERENCE_RATES",
    "make_family",
    "model_at",
    "default_proposal",
    "run_sweep",
    "bias_curve",
    "fit_log_slope",
    "chi2_bias_prediction",
    "entropy_estimate",
    "mi_tcpc_estimate",
    "total_correlation_estimate",
    "model_mutual_information",
    "rate_key",
]

INPUT_DIM = 20


@dataclass(frozen=True)
class SyntheticFamily:
    """Per-dimension ingredients (A0, A1, v) of the benchmark family."""

    d: int
    A0: np.ndarray
    A1: np.ndarray
    v: np.ndarray
    eps: float
    seed: int

    def __post_init__(self):
        if abs(float(np.linalg.norm(self.A0)) - 1.0) > 1e-10:
            raise DomainError("A0 must have unit Frobenius norm")
        if abs(float(np.linalg.norm(self.v)) - 1.0) > 1e-10:
            raise DomainError("v must be a unit vector")
        for arr in (self.A0, self.A1, self.v):
            np.asarray(arr).flags.writeable = False


def make_family(d: int, seed: int, eps: float = 0.5) -> SyntheticFamily:
    """Sample the dimension-d family deterministically from ``seed``."""
    if d < 1:
        raise DimensionError(f"d must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    a0 = rng.standard_normal((d, INPUT_DIM))
    a0 = a0 / np.linalg.norm(a0)
    v = rng.standard_normal(d)
    v = v / np.linalg.norm(v)
    a1 = np.zeros((d, INPUT_DIM))
    k = min(d, INPUT_DIM)
    a1[np.arange(k), np.arange(k)] = 1.0
    return SyntheticFamily(d=d, A0=a0, A1=a1, v=v, eps=eps, seed=int(seed))


def model_at(fam: SyntheticFamily, lam: float) -> LinearGaussianModel:
    """The linear conditional model at interpolation parameter ``lam``."""
    return LinearGaussianModel(A=0.5 * fam.A1 + lam * fam.A0, b=lam * fam.v,
                               noise_var=fam.eps**2)


def default_proposal(spec: DivergenceSpec) -> ProposalChoice:
    """Proposal with the better-behaved importance weights for each kind.

    With conditional scales below the reference's, mixture-proposal weights
    p/qhat have unbounded second moment, which is harmless for slowly growing
    integrands (kl and friends: terms grow linearly in the log-ratio) but
    ruinous for chisq/sqhellinger whose f0(r)/r blows up as r -> 0; those use
    the prior proposal, where their terms stay light-tailed.
    """
    if spec.kind in ("chisq", "sqhellinger", "tv"):
        return ProposalChoice.PRIOR
    return ProposalChoice.MIXTURE


@dataclass(frozen=True)
class SweepConfig:
    divergences: tuple
    dims: tuple
    lambdas: tuple
    Ns: tuple
    Ms: tuple
    proposals: tuple
    trials: int
    master_seed: int

    def __post_init__(self):
        for name in ("divergences", "dims", "lambdas", "Ns", "Ms", "proposals"):
            value = tuple(getattr(self, name))
            if not value:
                raise UsageError(f"{name} must be nonempty")
            object.__setattr__(self, name, value)
        if self.trials < 1:
            raise UsageError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class EstimateRecord:
    """One sweep row; ``truth`` is None when no closed form exists, inf when infinite."""

    divergence: str
    d: int
    lam: float
    N: int
    M: int
    proposal: str
    trial: int
    seed: int
    estimate: float
    truth: float | None


def _sweep_task(args) -> EstimateRecord:
    master_seed, div_label, d, lam, n_comp, m_samples, prop_label, trial = args
    spec = parse_divergence(div_label)
    proposal = ProposalChoice.parse(prop_label)
    fam = make_family(d, child_seed(master_seed, "family", d))
    model = model_at(fam, lam)
    prior = standard_normal(d)
    trial_seed = child_seed(master_seed, "sweep", div_label, d, float(lam),
                            n_comp, m_samples, prop_label, trial)
    rng = np.random.default_rng(trial_seed)
    xs = rng.standard_normal((n_comp, INPUT_DIM))
    mix = build_mixture(model, xs)
    est = ram_mc(spec, mix, prior, m_samples, proposal, rng)
    truth = None
    if spec.kind in CLOSED_FORM_KINDS:
        truth = closed_form(spec, marginal(model), prior)
    return EstimateRecord(divergence=div_label, d=d, lam=float(lam), N=n_comp,
                          M=m_samples, proposal=prop_label, trial=trial,
                          seed=trial_seed, estimate=est.value, truth=truth)


def run_sweep(cfg: SweepConfig, workers: int = 1) -> list[EstimateRecord]:
    """Evaluate every (cell, trial) of the grid; order and content are
    independent of ``workers`` because each task re-derives its own stream."""
    tasks = []
    for spec in cfg.divergences:
        label = spec.label() if isinstance(spec, DivergenceSpec) else str(spec)
        for d in cfg.dims:
            for lam in cfg.lambdas:
                for n_comp in cfg.Ns:
                    for m_samples in cfg.Ms:
                        for prop in cfg.proposals:
                            prop_label = prop.value if isinstance(prop, ProposalChoice) else str(prop)
                            for trial in range(cfg.trials):
                                tasks.append((cfg.master_seed, label, d, float(lam),
                                              n_comp, m_samples, prop_label, trial))
    if workers > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (workers * 8))
        with Pool(processes=workers) as pool:
            return pool.map(_sweep_task, tasks, chunksize=chunk)
    return [_sweep_task(t) for t in tasks]


def bias_curve(records) -> list[tuple[int, float, float]]:
    """Per-N (N, mean estimate - truth, standard error), ascending in N.

    All records must belong to one (divergence, d, lam, M, proposal) cell
    family with a finite truth.  Single-trial groups report a zero standard
    error.
    """
    records = list(records)
    if not records:
        raise UsageError("no records given")
    keys = {(r.divergence, r.d, r.lam, r.M, r.proposal) for r in records}
    if len(keys) != 1:
        raise UsageError(f"records mix {len(keys)} cell families; expected exactly one")
    truths = {r.truth for r in records}
    if len(truths) != 1:
        raise UsageError("records carry inconsistent truth values")
    truth = truths.pop()
    if truth is None or not math.isfinite(truth):
        raise UsageError("bias curve requires a finite truth")
    out = []
    for n_comp in sorted({r.N for r in records}):
        ests = np.array([r.estimate for r in records if r.N == n_comp])
        se = float(np.std(ests, ddof=1) / math.sqrt(ests.size)) if ests.size > 1 else 0.0
        out.append((n_comp, float(np.mean(ests)) - truth, se))
    return out


def fit_log_slope(ns, values) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if ns.size != values.size or ns.size < 3:
        raise UsageError("need at least 3 matching points to fit a slope")
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise DomainError("slope fit requires positive finite values")
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def chi2_bias_prediction(model: LinearGaussianModel, prior, n_x: int, rng):
    """The exact-decay prediction N -> c/N for the chi-square bias.

    Averaging D(qhat_N || p) over the X-sample gives, for chisq exactly,

        bias(N) = (1/N) * (E_X chisq(Q_{Z|X} || P) - chisq(Q_Z || P)),

    the variance-of-an-average identity.  The constant is estimated by
    closed forms over ``n_x`` Monte-Carlo draws of X (the conditionals share
    the covariance eps^2 I, so the per-draw closed form reduces to one
    quadratic form and is evaluated vectorized).  Returns a callable with
    the constant exposed as ``.c``; c is inf when either term is infinite.
    """
    if n_x < 1000:
        raise UsageError(f"n_x must be >= 1000, got {n_x}")
    xs = rng.standard_normal((n_x, model.input_dim))
    means = xs @ model.A.T + model.b
    mu_p, cov_p = mean_and_covariance(prior)
    d = model.d
    inv_noise = 1.0 / model.noise_var

    chol_p = np.linalg.cholesky(cov_p)
    logdet_p = 2.0 * float(np.sum(np.log(np.diag(chol_p))))
    eye = np.eye(d)
    prec_p = solve_triangular(chol_p.T, solve_triangular(chol_p, eye, lower=True), lower=False)
    lam_mat = 2.0 * inv_noise * eye - prec_p
    try:
        chol_lam = np.linalg.cholesky(0.5 * (lam_mat + lam_mat.T))
    except np.linalg.LinAlgError:
        e_cond = math.inf
    else:
        logdet_lam = 2.0 * float(np.sum(np.log(np.diag(chol_lam))))
        logdet_q = d * math.log(model.noise_var)
        eta = 2.0 * inv_noise * means - prec_p @ mu_p          # (n_x, d)
        white = solve_triangular(chol_lam, eta.T, lower=True)
        quad_eta = np.sum(white * white, axis=0)
        quad_q = inv_noise * np.sum(means * means, axis=1)
        quad_p = float(mu_p @ (prec_p @ mu_p))
        log_vals = (-logdet_q + 0.5 * logdet_p - 0.5 * logdet_lam
                    + 0.5 * quad_eta - quad_q + 0.5 * quad_p)
        with np.errstate(over="ignore"):
            e_cond = float(np.mean(np.expm1(log_vals)))

    chi_marg = closed_form(DivergenceSpec("chisq"), marginal(model), prior)
    c = math.inf if not (math.isfinite(e_cond) and math.isfinite(chi_marg)) else e_cond - chi_marg

    def prediction(n_comp):
        return c / np.asarray(n_comp, dtype=float) if np.ndim(n_comp) else c / float(n_comp)

    prediction.c = c
    return prediction


def entropy_estimate(m: FiniteMixture, m_samples: int, rng) -> float:
    """Monte-Carlo differential entropy -E_{Z~mixture}[log qhat(Z)]."""
    if m_samples < 1:
        raise UsageError(f"m_samples must be >= 1, got {m_samples}")
    z = m.sample(rng, m_samples)
    return -float(np.mean(m.log_density(z)))


def mi_tcpc_estimate(model: LinearGaussianModel, xs, m_inner: int, rng) -> float:
    """Average of KL(conditional_i || mixture) over the sample's components.

    Estimates a lower bound on the mutual information between input and
    latent: replacing the true marginal with the empirical mixture inside
    E_X KL(Q_{Z|X} || .) can only shrink the expected value.
    """
    if m_inner < 1:
        raise UsageError(f"m_inner must be >= 1, got {m_inner}")
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    mix = build_mixture(model, xs)
    total = 0.0
    for comp in mix.components:
        z = comp.sample(rng, m_inner)
        total += float(np.mean(comp.log_density(z) - mix.log_density(z)))
    return total / mix.n


def total_correlation_estimate(m: FiniteMixture, m_samples: int, rng) -> float:
    """sum_i H(marginal_i) - H(joint), each entropy by Monte Carlo.

    The i-th marginal of a diagonal-Gaussian mixture is exactly the 1-D
    mixture of the i-th component slices, so no extra approximation enters
    beyond the entropy sampling itself.
    """
    marg_sum = 0.0
    for i in range(m.dim):
        slices = [DiagonalGaussian(c.mean[i:i + 1], c.variances[i:i + 1]) for c in m.components]
        marg_sum += entropy_estimate(FiniteMixture(slices), m_samples, rng)
    return marg_sum - entropy_estimate(m, m_samples, rng)


def model_mutual_information(model: LinearGaussianModel) -> float:
    """Exact E_X KL(Q_{Z|X} || Q_Z) for the linear model.

    The trace terms cancel (tr(Sigma^-1 (A A^T + eps^2 I)) = d), leaving
    0.5 * log det(A A^T / eps^2 + I).
    """
    gram = model.A @ model.A.T / model.noise_var + np.eye(model.d)
    sign, logdet = np.linalg.slogdet(gram)
    return 0.5 * float(logdet)


# ---------------------------------------------------------------------------
# Reference convergence rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateTable:
    """Reference rate shapes per divergence family (strings; None where no
    rate of that kind is available).

    * ``bias_rates_chi2_moment``: bias in N assuming the conditional-vs-
      aggregate chi-square moment E_X chisq(Q_{Z|X}, Q_Z) is finite;
    * ``bias_rates_fourth_moment``: bias in N assuming the fourth ratio
      moment E[(q(Z|X)/p(Z))^4] is finite (see assumption_fourth_moment);
    * ``psi_rates``: concentration rate psi(N) of the estimator around its
      mean under a uniform chi-square bound (see assumption_chi2_bound).
    """

    bias_rates_chi2_moment: dict
    bias_rates_fourth_moment: dict
    psi_rates: dict


RATE_KEYS = ("kl", "tv", "chisq", "sqhellinger", "js",
             "fbeta_half_to_one", "fbeta_above_one", "falpha")

REFERENCE_RATES = RateTable(
    bias_rates_chi2_moment={
        "kl": "N^-1", "tv": "N^-1/2", "chisq": None, "sqhellinger": "N^-1/2",
        "js": "N^-1/4", "fbeta_half_to_one": "N^-1/4", "fbeta_above_one": "N^-1/4",
        "falpha": None,
    },
    bias_rates_fourth_moment={
        "kl": "N^-1/3 log N", "tv": "N^-1/2", "chisq": "N^-1", "sqhellinger": "N^-1/5",
        "js": "N^-1/3 log N", "fbeta_half_to_one": "N^-1/3", "fbeta_above_one": "N^-1/2",
        "falpha": "N^-(alpha+1)/(alpha+5)",
    },
    psi_rates={
        "kl": "N^-1/6 log N", "tv": "N^-1/2", "chisq": "N^-1/2", "sqhellinger": None,
        "js": "N^-1/6 log N", "fbeta_half_to_one": "N^-1/6", "fbeta_above_one": "N^-1/2",
        "falpha": "N^((1-3 alpha)/(alpha+5)) for alpha in (1/3, 1)",
    },
)


def rate_key(spec: DivergenceSpec) -> str:
    """Column of the reference tables that covers ``spec``."""
    if spec.kind == "fbeta":
        return "fbeta_half_to_one" if spec.beta < 1.0 else "fbeta_above_one"
    return spec.kind
