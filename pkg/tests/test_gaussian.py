"""Gaussian primitives against scipy oracles."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from ramdiv import (DiagonalGaussian, DimensionError, FullGaussian,
                    LinearGaussianModel, NumericalError, UsageError,
                    conditional, marginal, mean_and_covariance,
                    standard_normal)


class TestDiagonalGaussian:
    def setup_method(self):
        self.g = DiagonalGaussian([1.0, -2.0, 0.5], [0.5, 2.0, 1.0])

    def test_log_density_matches_scipy(self):
        rng = np.random.default_rng(0)
        pts = rng.standard_normal((40, 3))
        ref = stats.multivariate_normal(self.g.mean, np.diag(self.g.variances))
        assert_allclose(self.g.log_density(pts), ref.logpdf(pts), rtol=1e-12)

    def test_single_point_returns_scalar(self):
        val = self.g.log_density([0.0, 0.0, 0.0])
        assert isinstance(val, float)
        ref = stats.multivariate_normal(self.g.mean, np.diag(self.g.variances))
        assert_allclose(val, ref.logpdf(np.zeros(3)), rtol=1e-12)

    def test_sample_moments(self):
        rng = np.random.default_rng(1)
        z = self.g.sample(rng, 200000)
        assert z.shape == (200000, 3)
        assert_allclose(z.mean(axis=0), self.g.mean, atol=0.02)
        assert_allclose(z.var(axis=0), self.g.variances, rtol=0.03)

    def test_entropy_matches_scipy(self):
        ref = stats.multivariate_normal(self.g.mean, np.diag(self.g.variances))
        assert_allclose(self.g.entropy(), ref.entropy(), rtol=1e-12)

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(Exception):
            DiagonalGaussian([0.0], [0.0])

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(DimensionError):
            DiagonalGaussian([0.0, 1.0], [1.0])

    def test_wrong_point_dimension_rejected(self):
        with pytest.raises(DimensionError):
            self.g.log_density([0.0, 0.0])

    def test_sample_count_must_be_positive(self):
        with pytest.raises(UsageError):
            self.g.sample(np.random.default_rng(0), 0)


class TestFullGaussian:
    def setup_method(self):
        rng = np.random.default_rng(3)
        mat = rng.standard_normal((3, 3))
        self.cov = mat @ mat.T + 0.5 * np.eye(3)
        self.g = FullGaussian([0.3, -1.0, 2.0], self.cov)

    def test_log_density_matches_scipy(self):
        rng = np.random.default_rng(4)
        pts = rng.standard_normal((40, 3)) * 2.0
        ref = stats.multivariate_normal(self.g.mean, self.cov)
        assert_allclose(self.g.log_density(pts), ref.logpdf(pts), rtol=1e-11)

    def test_entropy_matches_scipy(self):
        ref = stats.multivariate_normal(self.g.mean, self.cov)
        assert_allclose(self.g.entropy(), ref.entropy(), rtol=1e-12)

    def test_sample_covariance(self):
        rng = np.random.default_rng(5)
        z = self.g.sample(rng, 400000)
        assert_allclose(np.cov(z, rowvar=False), self.cov, atol=0.05)
        assert_allclose(z.mean(axis=0), self.g.mean, atol=0.02)

    def test_asymmetric_covariance_rejected(self):
        bad = self.cov.copy()
        bad[0, 1] += 1e-3
        with pytest.raises(NumericalError):
            FullGaussian(np.zeros(3), bad)

    def test_indefinite_covariance_rejected(self):
        with pytest.raises(NumericalError):
            FullGaussian(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_diagonal_and_full_agree(self):
        dg = DiagonalGaussian([1.0, 2.0], [0.3, 0.9])
        fg = FullGaussian([1.0, 2.0], np.diag([0.3, 0.9]))
        pts = np.random.default_rng(6).standard_normal((10, 2))
        assert_allclose(dg.log_density(pts), fg.log_density(pts), rtol=1e-12)


class TestLinearGaussianModel:
    def setup_method(self):
        rng = np.random.default_rng(7)
        self.A = rng.standard_normal((2, 20)) * 0.2
        self.b = np.array([0.5, -0.5])
        self.model = LinearGaussianModel(A=self.A, b=self.b, noise_var=0.25)

    def test_conditional_mean_and_variance(self):
        x = np.random.default_rng(8).standard_normal(20)
        cond = conditional(self.model, x)
        assert_allclose(cond.mean, self.A @ x + self.b, rtol=1e-12)
        assert_allclose(cond.variances, [0.25, 0.25])

    def test_conditional_rejects_wrong_input_dim(self):
        with pytest.raises(DimensionError):
            conditional(self.model, np.zeros(19))

    def test_marginal_covariance(self):
        marg = marginal(self.model)
        assert_allclose(marg.covariance, self.A @ self.A.T + 0.25 * np.eye(2),
                        rtol=1e-12)
        assert_allclose(marg.mean, self.b)

    def test_marginal_agrees_with_sampling(self):
        # push x ~ N(0, I) through the model and compare moments
        rng = np.random.default_rng(9)
        xs = rng.standard_normal((300000, 20))
        zs = xs @ self.A.T + self.b + 0.5 * rng.standard_normal((300000, 2))
        marg = marginal(self.model)
        assert_allclose(zs.mean(axis=0), marg.mean, atol=0.01)
        assert_allclose(np.cov(zs, rowvar=False), marg.covariance, atol=0.01)

    def test_noise_var_must_be_positive(self):
        with pytest.raises(Exception):
            LinearGaussianModel(A=self.A, b=self.b, noise_var=0.0)


class TestHelpers:
    def test_standard_normal(self):
        p = standard_normal(3)
        assert_allclose(p.mean, np.zeros(3))
        assert_allclose(p.variances, np.ones(3))
        with pytest.raises(DimensionError):
            standard_normal(0)

    def test_mean_and_covariance_both_types(self):
        dg = DiagonalGaussian([1.0], [2.0])
        mu, cov = mean_and_covariance(dg)
        assert_allclose(mu, [1.0])
        assert_allclose(cov, [[2.0]])
        fg = FullGaussian([0.0, 0.0], np.eye(2))
        mu, cov = mean_and_covariance(fg)
        assert_allclose(cov, np.eye(2))

    def test_mean_and_covariance_rejects_other_types(self):
        with pytest.raises(UsageError):
            mean_and_covariance(object())
