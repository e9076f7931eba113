"""Kernel density baseline against the scipy implementation."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from ramdiv import (DimensionError, DivergenceSpec, UsageError, closed_form,
                    kde_fit, kde_log_density, plugin_estimate, standard_normal,
                    DiagonalGaussian)


class TestKdeFit:
    def test_bandwidth_factor_rule(self):
        rng = np.random.default_rng(0)
        for n, d in ((50, 1), (200, 3), (500, 16)):
            k = kde_fit(rng.standard_normal((n, d)))
            assert k.bandwidth_factor == pytest.approx(n ** (-1.0 / (d + 4)))
            assert k.n == n
            assert k.dim == d

    def test_kernel_covariance_is_scaled_sample_covariance(self):
        rng = np.random.default_rng(1)
        pts = rng.standard_normal((80, 2)) @ np.array([[1.0, 0.3], [0.0, 0.7]])
        k = kde_fit(pts)
        ref = k.bandwidth_factor**2 * np.cov(pts, rowvar=False, ddof=1)
        assert_allclose(k.kernel_cov, ref, rtol=1e-12)

    def test_too_few_points_rejected(self):
        with pytest.raises(UsageError):
            kde_fit(np.zeros((3, 3)))

    def test_wrong_shape_rejected(self):
        with pytest.raises(DimensionError):
            kde_fit(np.zeros(10))


class TestKdeLogDensity:
    def test_matches_scipy_gaussian_kde(self):
        # scipy uses the same bandwidth rule by default, so the log densities
        # must agree to float precision
        rng = np.random.default_rng(2)
        pts = rng.standard_normal((120, 2)) * np.array([1.0, 0.5]) + 0.3
        k = kde_fit(pts)
        ref = stats.gaussian_kde(pts.T)
        eval_pts = rng.standard_normal((40, 2)) * 1.5
        assert_allclose(kde_log_density(k, eval_pts),
                        ref.logpdf(eval_pts.T), rtol=1e-10)

    def test_matches_scipy_in_one_dimension(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(1.0, 2.0, size=(300, 1))
        k = kde_fit(pts)
        ref = stats.gaussian_kde(pts[:, 0])
        grid = np.linspace(-5, 7, 31)[:, None]
        assert_allclose(k.log_density(grid), ref.logpdf(grid[:, 0]), rtol=1e-10)

    def test_scalar_for_single_point(self):
        rng = np.random.default_rng(4)
        k = kde_fit(rng.standard_normal((50, 2)))
        assert isinstance(k.log_density([0.0, 0.0]), float)

    def test_far_point_is_finite(self):
        rng = np.random.default_rng(5)
        k = kde_fit(rng.standard_normal((50, 1)))
        val = k.log_density([80.0])
        assert np.isfinite(val) and val < -100


class TestPluginEstimate:
    def test_near_zero_for_identical_distributions(self):
        rng = np.random.default_rng(6)
        q = rng.standard_normal((4000, 1))
        p = rng.standard_normal((4000, 1))
        ev = rng.standard_normal((2000, 1))
        val = plugin_estimate(DivergenceSpec("kl"), q, p, ev)
        assert abs(val) < 0.1

    def test_recovers_moderate_low_dimensional_kl(self):
        rng = np.random.default_rng(7)
        q_dist = DiagonalGaussian([1.0], [1.0])
        q = q_dist.sample(rng, 8000)
        p = standard_normal(1).sample(rng, 8000)
        ev = q_dist.sample(rng, 4000)
        truth = closed_form(DivergenceSpec("kl"), q_dist, standard_normal(1))
        val = plugin_estimate(DivergenceSpec("kl"), q, p, ev)
        assert val == pytest.approx(truth, abs=0.12)

    def test_eval_shape_validation(self):
        rng = np.random.default_rng(8)
        q = rng.standard_normal((100, 2))
        with pytest.raises(DimensionError):
            plugin_estimate(DivergenceSpec("kl"), q, q, np.zeros(5))
