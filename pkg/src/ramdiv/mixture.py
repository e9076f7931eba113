"""Finite equal-weight Gaussian mixtures and the random-mixture Monte-Carlo estimator.

The estimation target is D_f(Q_Z || P_Z) where Q_Z is a continuous mixture of
conditionals Q_{Z|X} over X.  Replacing Q_Z with the empirical mixture over a
sample X_1..X_N,

    qhat_N(z) = (1/N) sum_i q(z | X_i),

turns the divergence into D_f(qhat_N || p), which ``ram_mc`` evaluates by
importance sampling with M draws from a proposal pi:

    (1/M) sum_m f0(qhat_N(Z_m)/p(Z_m)) * p(Z_m)/pi(Z_m),   Z_m ~ pi,

with pi either the reference p itself ("prior" proposal, weight identically
1) or the mixture qhat_N ("mixture" proposal).  Both choices are unbiased for
E[D_f(qhat_N || p)]; averaging over the X-sample, this expectation decreases
monotonically in N toward D_f(Q_Z || P_Z) (a Jensen/convexity argument via
sub-sampling, exercised by ``subsample_mixture``).

Everything is handled in log space end to end: mixture log-densities via a
log-sum-exp whose inner sum runs in sorted order (component permutation
invariance is then exact), the ratio and importance weight jointly from the
single log-ratio qhat_N/p.  A term that still overflows is reported as a
non-finite estimate, never clamped: a chi-square against a badly mismatched
scale legitimately diverges, and clamping would fake convergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError, UsageError
from .fdiv import DivergenceSpec, closed_form, f0_from_log_ratio, f0_over_x_from_log_ratio
from .gaussian import DiagonalGaussian, LinearGaussianModel, conditional

__all__ = [
    "FiniteMixture",
    "ProposalChoice",
    "McEstimate",
    "build_mixture",
    "mixture_log_density",
    "sample_mixture",
    "ram_mc",
    "subsample_mixture",
    "assumption_chi2_bound",
    "assumption_fourth_moment",
    "log_mean_exp",
]


class ProposalChoice(Enum):
    """Importance-sampling proposal: the reference density or the mixture itself."""

    PRIOR = "prior"
    MIXTURE = "mixture"

    @classmethod
    def parse(cls, label: str) -> "ProposalChoice":
        try:
            return cls(label.strip().lower())
        except ValueError:
            raise UsageError(f"unknown proposal {label!r}; expected 'prior' or 'mixture'") from None


@dataclass(frozen=True)
class McEstimate:
    """One Monte-Carlo divergence estimate and the knobs that produced it."""

    value: float
    m_samples: int
    n_components: int
    proposal: ProposalChoice
    seed: int = -1  # -1 when the caller supplied a live generator instead of a seed

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.value))


def log_mean_exp(log_values: np.ndarray, axis: int = -1) -> np.ndarray:
    """log of the mean of exp(log_values) along ``axis``.

    The exp terms are summed in sorted order, which makes the result exactly
    invariant under permutation of the inputs (a plain log-sum-exp would pick
    up order-dependent rounding).
    """
    log_values = np.asarray(log_values, dtype=float)
    top = np.max(log_values, axis=axis, keepdims=True)
    shifted = np.sort(log_values - top, axis=axis)
    total = np.sum(np.exp(shifted), axis=axis)
    n = log_values.shape[axis]
    return np.squeeze(top, axis=axis) + np.log(total) - np.log(n)


class FiniteMixture:
    """Equal-weight mixture of diagonal Gaussians, (1/N) sum_i N(mean_i, var_i).

    Only uniform weights are supported: that is the object the estimator is
    defined on, and weighted generality would add untested surface.
    """

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise UsageError("mixture needs at least one component")
        dim = components[0].dim
        for c in components:
            if not isinstance(c, DiagonalGaussian):
                raise UsageError("mixture components must be DiagonalGaussian")
            if c.dim != dim:
                raise DimensionError("mixture components must share one dimension")
        self.components = components
        self.n = len(components)
        self.dim = dim
        self._means = np.stack([c.mean for c in components])          # (N, d)
        self._variances = np.stack([c.variances for c in components])  # (N, d)
        self._log_norms = -0.5 * (np.sum(np.log(self._variances), axis=1)
                                  + dim * np.log(2.0 * np.pi))         # (N,)

    def _component_log_densities(self, pts: np.ndarray) -> np.ndarray:
        """(m, N) matrix of per-component log densities at (m, d) points."""
        diff = pts[:, None, :] - self._means[None, :, :]
        quad = np.sum(diff * diff / self._variances[None, :, :], axis=2)
        return self._log_norms[None, :] - 0.5 * quad

    def log_density(self, z):
        """Mixture log density via log-sum-exp; single point (d,) or batch (m, d)."""
        pts = np.asarray(z, dtype=float)
        if pts.ndim not in (1, 2) or pts.shape[-1] != self.dim:
            raise DimensionError(f"point shape {pts.shape} incompatible with dimension {self.dim}")
        out = log_mean_exp(self._component_log_densities(np.atleast_2d(pts)), axis=1)
        return float(out[0]) if pts.ndim == 1 else out

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw: a standard-normal block, then (for N > 1) component indices.

        The normals are drawn first so a single-component mixture consumes
        the stream exactly like the component itself would.
        """
        if count < 1:
            raise UsageError(f"count must be >= 1, got {count}")
        u = rng.standard_normal((count, self.dim))
        if self.n == 1:
            idx = np.zeros(count, dtype=int)
        else:
            idx = rng.integers(0, self.n, size=count)
        return self._means[idx] + np.sqrt(self._variances[idx]) * u


def build_mixture(model: LinearGaussianModel, xs) -> FiniteMixture:
    """The empirical mixture with component i = conditional(model, xs[i])."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[0] < 1 or xs.shape[1] != model.input_dim:
        raise DimensionError(f"xs must be (N, {model.input_dim}), got shape {xs.shape}")
    return FiniteMixture([conditional(model, row) for row in xs])


def mixture_log_density(m: FiniteMixture, z):
    return m.log_density(z)


def sample_mixture(m: FiniteMixture, rng: np.random.Generator, count: int) -> np.ndarray:
    return m.sample(rng, count)


def ram_mc(spec: DivergenceSpec, m: FiniteMixture, prior, m_samples: int,
           proposal: ProposalChoice, rng) -> McEstimate:
    """Importance-sampled Monte-Carlo estimate of D_f(mixture || prior).

    ``rng`` is either a numpy Generator or an integer seed; a seed is
    recorded in the returned estimate.  Under the prior proposal the weight
    is identically one and the terms are f0(ratio); under the mixture
    proposal the terms are f0(ratio)/ratio, evaluated jointly from the
    log-ratio so the two density passes are shared and the product stays
    finite whenever it is representable.  A non-finite mean is reported
    as-is (see ``McEstimate.finite``).
    """
    if m_samples < 1:
        raise UsageError(f"m_samples must be >= 1, got {m_samples}")
    if prior.dim != m.dim:
        raise DimensionError(f"prior dimension {prior.dim} != mixture dimension {m.dim}")
    seed = -1
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        rng = np.random.default_rng(seed)
    if proposal is ProposalChoice.PRIOR:
        z = prior.sample(rng, m_samples)
        log_ratio = m.log_density(z) - prior.log_density(z)
        terms = f0_from_log_ratio(spec, log_ratio)
    elif proposal is ProposalChoice.MIXTURE:
        z = m.sample(rng, m_samples)
        log_ratio = m.log_density(z) - prior.log_density(z)
        terms = f0_over_x_from_log_ratio(spec, log_ratio)
    else:
        raise UsageError(f"unknown proposal {proposal!r}")
    value = float(np.mean(terms))
    return McEstimate(value=value, m_samples=m_samples, n_components=m.n,
                      proposal=proposal, seed=seed)


def subsample_mixture(m: FiniteMixture, m_sub: int, rng: np.random.Generator) -> FiniteMixture:
    """Uniform sub-mixture of ``m_sub`` components chosen without replacement."""
    if not 1 <= m_sub <= m.n:
        raise UsageError(f"m_sub must lie in [1, {m.n}], got {m_sub}")
    idx = rng.choice(m.n, size=m_sub, replace=False)
    return FiniteMixture([m.components[i] for i in idx])


def assumption_chi2_bound(model: LinearGaussianModel, xs, prior) -> float:
    """max_i chisq(conditional(model, x_i) || prior), the uniform tail-bound hypothesis.

    Returns ``inf`` as soon as any component falls outside the finite
    chi-square regime.
    """
    xs = np.asarray(xs, dtype=float)
    spec = DivergenceSpec("chisq")
    worst = 0.0
    for row in np.atleast_2d(xs):
        value = closed_form(spec, conditional(model, row), prior)
        if not np.isfinite(value):
            return float("inf")
        worst = max(worst, value)
    return worst


def assumption_fourth_moment(model: LinearGaussianModel, xs, prior,
                             m_samples: int, rng: np.random.Generator) -> float:
    """Monte-Carlo estimate of E[ (q(Z|X)/p(Z))^4 ], X uniform on xs rows, Z ~ prior.

    This is the moment whose finiteness buys the faster family of bias rates.
    When the defining integral diverges the estimate grows without bound with
    ``m_samples`` and eventually overflows; overflow is reported as ``inf``.
    """
    if m_samples < 1:
        raise UsageError(f"m_samples must be >= 1, got {m_samples}")
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    idx = rng.integers(0, xs.shape[0], size=m_samples)
    z = prior.sample(rng, m_samples)
    means = xs @ model.A.T + model.b            # (N, d)
    diff = z - means[idx]
    log_q = -0.5 * (np.sum(diff * diff, axis=1) / model.noise_var
                    + model.d * np.log(2.0 * np.pi * model.noise_var))
    log_ratio = log_q - prior.log_density(z)
    with np.errstate(over="ignore"):
        return float(np.mean(np.exp(4.0 * log_ratio)))
