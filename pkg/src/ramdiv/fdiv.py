"""f-divergence generators, Gaussian closed forms, a quadrature oracle and derivative bounds.

An f-divergence between densities q and p is

    D_f(q || p) = integral of f(q(z)/p(z)) * p(z) dz

for convex f with f(1) = 0.  Every divergence here is represented by a
normalized generator ``f0`` (f shifted by a multiple of (x - 1), which never
changes the divergence) chosen so that f0 >= 0 and f0 is minimized at 1.

Supported kinds and their generators:

======================  =====================================================
kl                      f0(x) = x log x - x + 1
tv                      f0(x) = |1 - x| / 2
chisq                   f0(x) = (x - 1)^2
sqhellinger             f0(x) = (1 - sqrt(x))^2        (divergence in [0, 2])
js                      f0(x) = (1 + x) log(2 / (1 + x)) + x log x
fbeta   (beta)          [beta/(beta-1)] [(1 + x^beta)^(1/beta)
                                         - 2^(1/beta - 1) (1 + x)]
falpha  (alpha)         4/(1 - alpha^2) (1 - x^((1+alpha)/2))
                                         - 2 (x - 1)/(alpha - 1)
======================  =====================================================

``fbeta`` takes beta in (1/2, inf) excluding 1 (beta = 1 and beta = inf are
the separate ``js`` and ``tv`` kinds); ``falpha`` takes alpha in (-1, 1).

Generators are evaluated from log-ratios internally, so density ratios with
log magnitude in the hundreds never have to be formed directly; a ratio that
still overflows float range yields ``inf`` for the caller to flag.  The
x -> 0 limits (ratio underflow) are hard-coded per divergence.  A +inf ratio
is not a valid generator input and raises ``DomainError``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionError, DomainError, NumericalError, UnsupportedError, UsageError
from .gaussian import mean_and_covariance

__all__ = [
    "KINDS",
    "CLOSED_FORM_KINDS",
    "DivergenceSpec",
    "parse_divergence",
    "f0",
    "f0_prime",
    "f0_from_log_ratio",
    "f0_over_x_from_log_ratio",
    "closed_form",
    "quadrature_divergence",
    "lemma_bound_h",
    "dominance_margins",
]

LOG2 = math.log(2.0)

KINDS = ("kl", "tv", "chisq", "sqhellinger", "js", "fbeta", "falpha")

# Kinds with an exact Gaussian closed form.
CLOSED_FORM_KINDS = ("kl", "chisq", "sqhellinger")


@dataclass(frozen=True)
class DivergenceSpec:
    """One f-divergence: a kind plus its parameter, if any."""

    kind: str
    beta: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown divergence kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "fbeta":
            if self.beta is None:
                raise UsageError("fbeta requires a beta parameter")
            if not (self.beta > 0.5 and self.beta != 1.0 and math.isfinite(self.beta)):
                raise DomainError(f"beta must lie in (1/2, inf) \\ {{1}}, got {self.beta}")
        elif self.beta is not None:
            raise UsageError(f"beta is only meaningful for fbeta, not {self.kind}")
        if self.kind == "falpha":
            if self.alpha is None:
                raise UsageError("falpha requires an alpha parameter")
            if not -1.0 < self.alpha < 1.0:
                raise DomainError(f"alpha must lie in (-1, 1), got {self.alpha}")
        elif self.alpha is not None:
            raise UsageError(f"alpha is only meaningful for falpha, not {self.kind}")

    def label(self) -> str:
        if self.kind == "fbeta":
            return f"fbeta:{self.beta!r}"
        if self.kind == "falpha":
            return f"falpha:{self.alpha!r}"
        return self.kind


def parse_divergence(label: str) -> DivergenceSpec:
    """Inverse of :meth:`DivergenceSpec.label` (e.g. ``"kl"``, ``"fbeta:0.75"``)."""
    name, _, param = label.strip().partition(":")
    name = name.lower()
    if name == "fbeta":
        if not param:
            raise UsageError("fbeta label needs a parameter, e.g. 'fbeta:0.75'")
        return DivergenceSpec("fbeta", beta=float(param))
    if name == "falpha":
        if not param:
            raise UsageError("falpha label needs a parameter, e.g. 'falpha:0.5'")
        return DivergenceSpec("falpha", alpha=float(param))
    if param:
        raise UsageError(f"divergence {name!r} takes no parameter")
    return DivergenceSpec(name)


# ---------------------------------------------------------------------------
# Generator evaluation
# ---------------------------------------------------------------------------

def _as_float_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _f0_limit_at_zero(spec: DivergenceSpec) -> float:
    """lim_{x -> 0+} f0(x); finite for every supported kind."""
    if spec.kind == "kl":
        return 1.0
    if spec.kind == "tv":
        return 0.5
    if spec.kind in ("chisq", "sqhellinger"):
        return 1.0
    if spec.kind == "js":
        return LOG2
    if spec.kind == "fbeta":
        b = spec.beta
        return (b / (b - 1.0)) * (1.0 - 2.0 ** (1.0 / b - 1.0))
    if spec.kind == "falpha":
        return 2.0 / (1.0 + spec.alpha)
    raise UnsupportedError(spec.kind)


def f0_from_log_ratio(spec: DivergenceSpec, log_ratio):
    """Evaluate f0(exp(log_ratio)) stably.

    ``log_ratio`` may be a scalar or array; -inf entries (ratio underflow)
    map to the x -> 0 limit, +inf entries raise ``DomainError``.
    """
    l, scalar = _as_float_array(log_ratio)
    if np.any(np.isposinf(l)):
        raise DomainError("+inf log-ratio is not a valid generator input")
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        if spec.kind == "kl":
            out = np.exp(l) * (l - 1.0) + 1.0
        elif spec.kind == "tv":
            out = 0.5 * np.abs(np.expm1(l))
        elif spec.kind == "chisq":
            out = np.square(np.expm1(l))
        elif spec.kind == "sqhellinger":
            out = np.square(np.expm1(0.5 * l))
        elif spec.kind == "js":
            x = np.exp(l)
            out = (1.0 + x) * (LOG2 - np.logaddexp(0.0, l)) + x * l
        elif spec.kind == "fbeta":
            b = spec.beta
            c = b / (b - 1.0)
            out = c * (np.exp(np.logaddexp(0.0, b * l) / b)
                       - 2.0 ** (1.0 / b - 1.0) * (1.0 + np.exp(l)))
        elif spec.kind == "falpha":
            a = spec.alpha
            out = (4.0 / (1.0 - a * a)) * (-np.expm1(0.5 * (1.0 + a) * l)) \
                + (2.0 / (1.0 - a)) * np.expm1(l)
        else:
            raise UnsupportedError(spec.kind)
    out = np.where(np.isneginf(l), _f0_limit_at_zero(spec), out)
    return float(out) if scalar else out


def f0_over_x_from_log_ratio(spec: DivergenceSpec, log_ratio):
    """Evaluate f0(x)/x at x = exp(log_ratio), in stabilized per-kind form.

    This is the mixture-proposal integrand: computing f0 and the importance
    weight jointly keeps results finite whenever the product is representable
    (e.g. for kl it is just ``l - 1 + exp(-l)`` even when exp(l) overflows).
    """
    l, scalar = _as_float_array(log_ratio)
    if np.any(np.isposinf(l)):
        raise DomainError("+inf log-ratio is not a valid generator input")
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        if spec.kind == "kl":
            out = l - 1.0 + np.exp(-l)
        elif spec.kind == "tv":
            out = 0.5 * np.abs(np.expm1(-l))
        elif spec.kind == "chisq":
            out = np.expm1(l) + np.expm1(-l)
        elif spec.kind == "sqhellinger":
            out = np.square(np.expm1(-0.5 * l))
        elif spec.kind == "js":
            out = (1.0 + np.exp(-l)) * (LOG2 - np.logaddexp(0.0, l)) + l
        elif spec.kind == "fbeta":
            b = spec.beta
            c = b / (b - 1.0)
            out = c * (np.exp(np.logaddexp(0.0, -b * l) / b)
                       - 2.0 ** (1.0 / b - 1.0) * (1.0 + np.exp(-l)))
        elif spec.kind == "falpha":
            a = spec.alpha
            out = (4.0 / (1.0 - a * a)) * (np.exp(-l) - np.exp(0.5 * (a - 1.0) * l)) \
                + (2.0 / (1.0 - a)) * (-np.expm1(-l))
        else:
            raise UnsupportedError(spec.kind)
    return float(out) if scalar else out


def f0(spec: DivergenceSpec, x):
    """The normalized generator f0 at ratio ``x`` >= 0 (f0(1) = 0, f0 >= 0)."""
    arr, scalar = _as_float_array(x)
    if np.any(arr < 0.0):
        raise DomainError("generator argument must be nonnegative")
    if np.any(np.isposinf(arr)):
        raise DomainError("+inf ratio is not a valid generator input")
    with np.errstate(divide="ignore"):
        l = np.log(arr)
    out = f0_from_log_ratio(spec, l)
    return float(out) if scalar else out


def f0_prime(spec: DivergenceSpec, x):
    """Derivative of f0 at ``x`` > 0; monotone non-decreasing by convexity.

    tv has a kink at 1; the symmetric sub-gradient 0 is returned there.
    """
    arr, scalar = _as_float_array(x)
    if np.any(arr <= 0.0):
        raise DomainError("f0_prime requires x > 0")
    if np.any(np.isposinf(arr)):
        raise DomainError("+inf ratio is not a valid generator input")
    if spec.kind == "kl":
        out = np.log(arr)
    elif spec.kind == "tv":
        out = 0.5 * np.sign(arr - 1.0)
    elif spec.kind == "chisq":
        out = 2.0 * (arr - 1.0)
    elif spec.kind == "sqhellinger":
        out = 1.0 - 1.0 / np.sqrt(arr)
    elif spec.kind == "js":
        l = np.log(arr)
        out = LOG2 + l - np.logaddexp(0.0, l)
    elif spec.kind == "fbeta":
        b = spec.beta
        l = np.log(arr)
        out = (b / (b - 1.0)) * (np.exp(((1.0 - b) / b) * np.logaddexp(0.0, -b * l))
                                 - 2.0 ** (1.0 / b - 1.0))
    elif spec.kind == "falpha":
        a = spec.alpha
        out = (2.0 / (1.0 - a)) * (1.0 - arr ** (0.5 * (a - 1.0)))
    else:
        raise UnsupportedError(spec.kind)
    return float(out) if scalar else np.asarray(out)


# ---------------------------------------------------------------------------
# Closed forms between Gaussians
# ---------------------------------------------------------------------------

def _chol_logdet(cov: np.ndarray) -> tuple[np.ndarray, float]:
    chol = np.linalg.cholesky(cov)
    return chol, 2.0 * float(np.sum(np.log(np.diag(chol))))


def _spd_solve(chol: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    y = solve_triangular(chol, rhs, lower=True)
    return solve_triangular(chol.T, y, lower=False)


def closed_form(spec: DivergenceSpec, q, p) -> float:
    """Exact D_f(q || p) between Gaussians for kl, chisq and sqhellinger.

    chisq is finite only when 2*inv(cov_q) - inv(cov_p) is positive definite
    (the defining integral of q^2/p diverges otherwise); the infinite case is
    reported as ``math.inf``.  Other kinds raise ``UnsupportedError``.
    """
    mu_q, cov_q = mean_and_covariance(q)
    mu_p, cov_p = mean_and_covariance(p)
    if mu_q.size != mu_p.size:
        raise DimensionError(f"dimension mismatch: {mu_q.size} vs {mu_p.size}")
    d = mu_q.size

    chol_q, logdet_q = _chol_logdet(cov_q)
    chol_p, logdet_p = _chol_logdet(cov_p)

    if spec.kind == "kl":
        trace = float(np.trace(_spd_solve(chol_p, cov_q)))
        diff = mu_p - mu_q
        y = solve_triangular(chol_p, diff, lower=True)
        quad = float(y @ y)
        return 0.5 * (trace + quad - d + logdet_p - logdet_q)

    if spec.kind == "chisq":
        prec_q = _spd_solve(chol_q, np.eye(d))
        prec_p = _spd_solve(chol_p, np.eye(d))
        lam = 2.0 * prec_q - prec_p
        lam = 0.5 * (lam + lam.T)
        try:
            chol_lam, logdet_lam = _chol_logdet(lam)
        except np.linalg.LinAlgError:
            return math.inf
        eta = 2.0 * (prec_q @ mu_q) - prec_p @ mu_p
        quad_eta = float(eta @ _spd_solve(chol_lam, eta))
        quad_q = float(mu_q @ (prec_q @ mu_q))
        quad_p = float(mu_p @ (prec_p @ mu_p))
        log_val = (-logdet_q + 0.5 * logdet_p - 0.5 * logdet_lam
                   + 0.5 * quad_eta - quad_q + 0.5 * quad_p)
        with np.errstate(over="ignore"):
            return float(np.expm1(log_val))

    if spec.kind == "sqhellinger":
        cov_bar = 0.5 * (cov_q + cov_p)
        chol_bar, logdet_bar = _chol_logdet(cov_bar)
        diff = mu_q - mu_p
        y = solve_triangular(chol_bar, diff, lower=True)
        log_bc = 0.25 * logdet_q + 0.25 * logdet_p - 0.5 * logdet_bar - 0.125 * float(y @ y)
        return -2.0 * float(np.expm1(log_bc))

    raise UnsupportedError(f"no closed form for {spec.kind}")


# ---------------------------------------------------------------------------
# Quadrature oracle (1-D)
# ---------------------------------------------------------------------------

def quadrature_divergence(spec: DivergenceSpec, q_logpdf, p_logpdf,
                          lo: float, hi: float, n_points: int) -> float:
    """Trapezoid approximation of D_f(q || p) = integral f0(q/p) p on [lo, hi].

    A deliberately plain deterministic oracle for tests and diagnostics: the
    log-density callables are evaluated on a uniform grid (vectorized when
    they accept arrays).  For smooth integrands decaying inside the interval,
    the composite trapezoid rule converges superalgebraically, so generous
    ``n_points`` buys accuracy cheaply.
    """
    if n_points < 1000:
        raise UsageError(f"n_points must be >= 1000, got {n_points}")
    if not lo < hi:
        raise UsageError(f"need lo < hi, got [{lo}, {hi}]")
    grid = np.linspace(lo, hi, n_points)

    def _eval(fn):
        try:
            vals = np.asarray(fn(grid), dtype=float)
            if vals.shape != grid.shape:
                raise TypeError
        except Exception:
            vals = np.array([float(fn(t)) for t in grid])
        return vals

    lq = _eval(q_logpdf)
    lp = _eval(p_logpdf)
    integrand = np.exp(lp) * f0_from_log_ratio(spec, lq - lp)
    if not np.all(np.isfinite(integrand)):
        raise NumericalError("non-finite integrand sample in quadrature")
    return float(np.trapezoid(integrand, grid))


# ---------------------------------------------------------------------------
# Derivative bound functions h_delta
# ---------------------------------------------------------------------------

def lemma_bound_h(spec: DivergenceSpec, delta: float, x):
    """Upper bound h_delta(x) >= f0_prime(x)^2 valid on [delta, infinity).

    Writing g = f0_prime^2, the bounds are:

    * kl          -- piecewise: g(delta) + x g'(e) on [0, e], then
                     g(delta) + e g'(e) + g(x) - g(e), i.e.
                     log(delta)^2 + 2x/e, then log(delta)^2 + 1 + log(x)^2;
    * sqhellinger -- (x - 1)^2 / delta;
    * falpha      -- (x - 1)^2 scaled by g(delta)/(delta - 1)^2;
    * js          -- the constant g(delta) + 4 log(2)^2;
    * fbeta, beta in (1/2, 1) -- the constant g(delta) + lim_{x->inf} g(x);
    * fbeta, beta > 1 -- the constant max of g's limits at 0 and infinity
                     (this branch is a plain constant bound, not a named
                     h_delta form; g is monotone on each side of 1 so the
                     larger limit dominates everywhere on [0, inf)).

    tv needs no bound (|f0_prime| <= 1/2 everywhere) and chisq admits none of
    this family; both raise ``UnsupportedError``.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    arr, scalar = _as_float_array(x)
    if np.any(arr < 0.0):
        raise DomainError("h_delta is defined for x >= 0")

    def g(t):
        return f0_prime(spec, t) ** 2

    if spec.kind == "kl":
        gd = math.log(delta) ** 2
        with np.errstate(divide="ignore"):
            upper = gd + 1.0 + np.square(np.log(np.maximum(arr, 1.0)))
        out = np.where(arr <= math.e, gd + 2.0 * arr / math.e, upper)
    elif spec.kind == "sqhellinger":
        out = np.square(arr - 1.0) / delta
    elif spec.kind == "falpha":
        coef = g(delta) / (delta - 1.0) ** 2
        out = coef * np.square(arr - 1.0)
    elif spec.kind == "js":
        out = np.full_like(arr, g(delta) + 4.0 * LOG2 ** 2)
    elif spec.kind == "fbeta":
        b = spec.beta
        c2 = (b / (1.0 - b)) ** 2
        if b < 1.0:
            lim_inf = c2 * (1.0 - 2.0 ** (1.0 / b - 1.0)) ** 2
            out = np.full_like(arr, g(delta) + lim_inf)
        else:
            lim_zero = c2 * 2.0 ** (2.0 * (1.0 / b - 1.0))
            lim_inf = c2 * (1.0 - 2.0 ** (1.0 / b - 1.0)) ** 2
            out = np.full_like(arr, max(lim_zero, lim_inf))
    else:
        raise UnsupportedError(f"no h_delta bound for {spec.kind}")
    return float(out) if scalar else out


def dominance_margins(spec: DivergenceSpec, delta: float, grid_points: int = 10000,
                      x_max: float = 100.0, bound_scale: float = 1.0):
    """Margins h_delta(x) - f0_prime(x)^2 on a log-spaced grid over [delta, x_max].

    All margins should be >= 0 up to float noise.  ``bound_scale`` scales the
    bound and exists purely as a negative-control hook for the checker (a
    corrupted bound must be caught).
    """
    if grid_points < 2:
        raise UsageError(f"grid_points must be >= 2, got {grid_points}")
    xs = np.geomspace(delta, x_max, grid_points)
    margins = bound_scale * lemma_bound_h(spec, delta, xs) - f0_prime(spec, xs) ** 2
    return xs, margins
