"""Multivariate Gaussians (diagonal and full covariance) and the linear conditional model.

These are the distribution building blocks for the whole package: diagonal
Gaussians play the role of conditionals N(Ax + b, eps^2 I), full-covariance
Gaussians the role of reference and marginal distributions.  Densities are
evaluated in log space; full-covariance work goes through a Cholesky factor
computed once at construction (fail fast on non-SPD input, amortize the cost
over many density evaluations).  No jitter is ever added to a covariance:
callers are expected to pass well-conditioned matrices, and silently
regularizing would perturb the closed-form oracles built on top of these
types.

All distribution objects are immutable after construction and safe to share
across threads; every operation is pure given an explicit random stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionError, DomainError, NumericalError, UsageError

__all__ = [
    "DiagonalGaussian",
    "FullGaussian",
    "LinearGaussianModel",
    "conditional",
    "marginal",
    "mean_and_covariance",
    "standard_normal",
]

LOG_2PI = math.log(2.0 * math.pi)


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a nonempty 1-D array, got shape {arr.shape}")
    return arr


def _check_points(z, dim: int) -> np.ndarray:
    """Validate a single point (d,) or a batch (m, d) against ``dim``."""
    pts = np.asarray(z, dtype=float)
    if pts.ndim not in (1, 2) or pts.shape[-1] != dim:
        raise DimensionError(f"point shape {pts.shape} incompatible with dimension {dim}")
    return pts


class DiagonalGaussian:
    """Gaussian with diagonal covariance, N(mean, diag(variances))."""

    def __init__(self, mean, variances):
        self.mean = _as_vector(mean, "mean")
        self.variances = _as_vector(variances, "variances")
        if self.mean.shape != self.variances.shape:
            raise DimensionError(
                f"mean length {self.mean.size} != variances length {self.variances.size}"
            )
        if not np.all(self.variances > 0.0):
            raise DomainError("variances must be strictly positive")
        self.dim = self.mean.size
        self._log_norm = float(np.sum(np.log(self.variances)) + self.dim * LOG_2PI)
        self.mean.flags.writeable = False
        self.variances.flags.writeable = False

    def log_density(self, z):
        """Log density at ``z``; accepts a single point (d,) or a batch (m, d)."""
        pts = _check_points(z, self.dim)
        quad = np.sum((pts - self.mean) ** 2 / self.variances, axis=-1)
        out = -0.5 * (quad + self._log_norm)
        return float(out) if pts.ndim == 1 else out

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if count < 1:
            raise UsageError(f"count must be >= 1, got {count}")
        u = rng.standard_normal((count, self.dim))
        return self.mean + np.sqrt(self.variances) * u

    def entropy(self) -> float:
        return 0.5 * float(self.dim * (1.0 + LOG_2PI) + np.sum(np.log(self.variances)))

    def __repr__(self):
        return f"DiagonalGaussian(d={self.dim})"


class FullGaussian:
    """Gaussian with a full symmetric positive-definite covariance.

    The Cholesky factor is computed at construction and cached; a matrix that
    is not symmetric (to 1e-12 relative) or not SPD raises ``NumericalError``
    immediately rather than at first use.
    """

    def __init__(self, mean, covariance):
        self.mean = _as_vector(mean, "mean")
        cov = np.asarray(covariance, dtype=float)
        d = self.mean.size
        if cov.shape != (d, d):
            raise DimensionError(f"covariance shape {cov.shape} != ({d}, {d})")
        scale = max(float(np.max(np.abs(cov))), 1.0)
        if float(np.max(np.abs(cov - cov.T))) > 1e-12 * scale:
            raise NumericalError("covariance is not symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("covariance is not positive definite") from exc
        if float(np.max(np.abs(chol @ chol.T - cov))) > 1e-10 * scale:
            raise NumericalError("Cholesky factor does not reproduce the covariance")
        self.covariance = cov
        self.cholesky = chol
        self.dim = d
        self._log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        for arr in (self.mean, self.covariance, self.cholesky):
            arr.flags.writeable = False

    def log_density(self, z):
        """Log density at ``z``; accepts a single point (d,) or a batch (m, d)."""
        pts = _check_points(z, self.dim)
        diff = np.atleast_2d(pts) - self.mean
        y = solve_triangular(self.cholesky, diff.T, lower=True)
        quad = np.sum(y * y, axis=0)
        out = -0.5 * (quad + self._log_det + self.dim * LOG_2PI)
        return float(out[0]) if pts.ndim == 1 else out

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if count < 1:
            raise UsageError(f"count must be >= 1, got {count}")
        u = rng.standard_normal((count, self.dim))
        return self.mean + u @ self.cholesky.T

    def entropy(self) -> float:
        return 0.5 * (self.dim * (1.0 + LOG_2PI) + self._log_det)

    def __repr__(self):
        return f"FullGaussian(d={self.dim})"


@dataclass(frozen=True)
class LinearGaussianModel:
    """Conditional model z | x ~ N(A x + b, noise_var * I).

    ``A`` is d-by-input_dim, ``b`` has length d.  Together with a standard
    normal input distribution this induces the exact marginal
    N(b, A A^T + noise_var I) returned by :func:`marginal`.
    """

    A: np.ndarray
    b: np.ndarray
    noise_var: float
    input_dim: int = 20

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = _as_vector(self.b, "b")
        if A.ndim != 2 or A.shape != (b.size, self.input_dim):
            raise DimensionError(
                f"A shape {A.shape} incompatible with ({b.size}, {self.input_dim})"
            )
        if not self.noise_var > 0.0:
            raise DomainError(f"noise_var must be positive, got {self.noise_var}")
        A.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def d(self) -> int:
        return self.b.size


def conditional(model: LinearGaussianModel, x) -> DiagonalGaussian:
    """The conditional N(A x + b, noise_var I) for one input ``x``."""
    xv = _as_vector(x, "x")
    if xv.size != model.input_dim:
        raise DimensionError(f"x length {xv.size} != input_dim {model.input_dim}")
    mean = model.A @ xv + model.b
    return DiagonalGaussian(mean, np.full(model.d, model.noise_var))


def marginal(model: LinearGaussianModel) -> FullGaussian:
    """The exact marginal N(b, A A^T + noise_var I) under x ~ N(0, I)."""
    cov = model.A @ model.A.T + model.noise_var * np.eye(model.d)
    return FullGaussian(model.b, cov)


def standard_normal(d: int) -> DiagonalGaussian:
    """N(0, I_d)."""
    if d < 1:
        raise DimensionError(f"dimension must be >= 1, got {d}")
    return DiagonalGaussian(np.zeros(d), np.ones(d))


def mean_and_covariance(g) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``(mean, covariance)`` view of either Gaussian type."""
    if isinstance(g, DiagonalGaussian):
        return g.mean, np.diag(g.variances)
    if isinstance(g, FullGaussian):
        return g.mean, g.covariance
    raise UsageError(f"expected DiagonalGaussian or FullGaussian, got {type(g).__name__}")
