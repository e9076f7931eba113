"""Gaussian kernel density estimation and the plug-in divergence baseline.

The baseline fits one KDE to samples from each side of the divergence and
substitutes the two surrogate densities into the defining integral, which is
then evaluated by Monte Carlo over points drawn from the first argument's
distribution:

    (1/M) sum_m f0(r(z_m)) / r(z_m),    r = qhat/phat,  z_m ~ Q.

The f0(r)/r weighting converts the Q-sample average into the p-reference
integral of f0(qhat/phat).  Bandwidths follow the Scott rule: kernel
covariance n^(-2/(d+4)) times the unbiased sample covariance, the default of
the usual Gaussian-KDE implementations.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionError, NumericalError, UsageError
from .fdiv import DivergenceSpec, f0_over_x_from_log_ratio
from .mixture import log_mean_exp

__all__ = ["KdeModel", "kde_fit", "kde_log_density", "plugin_estimate"]


class KdeModel:
    """Equal-weight Gaussian-kernel mixture centred on the fitted points."""

    def __init__(self, points: np.ndarray, bandwidth_factor: float, kernel_cov: np.ndarray):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise DimensionError(f"points must be (n, d), got shape {points.shape}")
        self.points = points
        self.bandwidth_factor = float(bandwidth_factor)
        kernel_cov = np.asarray(kernel_cov, dtype=float)
        try:
            chol = np.linalg.cholesky(kernel_cov)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("kernel covariance is singular or not SPD") from exc
        self.kernel_cov = kernel_cov
        self._chol = chol
        d = points.shape[1]
        self._log_norm = -float(np.sum(np.log(np.diag(chol)))) - 0.5 * d * np.log(2.0 * np.pi)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def log_density(self, z):
        """KDE log density; single point (d,) or batch (m, d)."""
        pts = np.asarray(z, dtype=float)
        if pts.ndim not in (1, 2) or pts.shape[-1] != self.dim:
            raise DimensionError(f"point shape {pts.shape} incompatible with dimension {self.dim}")
        batch = np.atleast_2d(pts)
        # (d, m, n) whitened displacements against every fitted point
        diff = batch[:, None, :] - self.points[None, :, :]
        flat = diff.reshape(-1, self.dim)
        white = solve_triangular(self._chol, flat.T, lower=True)
        quad = np.sum(white * white, axis=0).reshape(batch.shape[0], self.n)
        out = log_mean_exp(self._log_norm - 0.5 * quad, axis=1)
        return float(out[0]) if pts.ndim == 1 else out


def kde_fit(samples) -> KdeModel:
    """Fit a Gaussian KDE with the Scott bandwidth factor n^(-1/(d+4))."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise DimensionError(f"samples must be (n, d), got shape {samples.shape}")
    n, d = samples.shape
    if n < d + 1:
        raise UsageError(f"need at least d+1={d + 1} samples for a nonsingular covariance, got {n}")
    factor = n ** (-1.0 / (d + 4))
    sample_cov = np.atleast_2d(np.cov(samples, rowvar=False, ddof=1))
    return KdeModel(samples, factor, factor**2 * sample_cov)


def kde_log_density(k: KdeModel, z):
    return k.log_density(z)


def plugin_estimate(spec: DivergenceSpec, q_samples, p_samples, eval_samples_from_q) -> float:
    """Plug-in divergence estimate from KDE surrogates.

    ``eval_samples_from_q`` are Monte-Carlo points drawn from the true Q
    distribution (not from the KDE).  The estimate may legitimately come out
    negative or blow up in high dimension; non-finite results are returned
    as-is for the caller to flag.
    """
    eval_pts = np.asarray(eval_samples_from_q, dtype=float)
    if eval_pts.ndim != 2 or eval_pts.shape[0] < 1:
        raise DimensionError(f"eval samples must be (M, d), got shape {eval_pts.shape}")
    q_hat = kde_fit(q_samples)
    p_hat = kde_fit(p_samples)
    log_ratio = q_hat.log_density(eval_pts) - p_hat.log_density(eval_pts)
    with np.errstate(over="ignore"):
        terms = f0_over_x_from_log_ratio(spec, log_ratio)
    return float(np.mean(terms))
