"""Finite mixtures, log-sum-exp, the Monte-Carlo estimator, assumption probes."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import logsumexp

from ramdiv import (DiagonalGaussian, DimensionError, DivergenceSpec,
                    FiniteMixture, LinearGaussianModel, ProposalChoice,
                    UsageError, assumption_chi2_bound,
                    assumption_fourth_moment, build_mixture, closed_form,
                    conditional, f0_from_log_ratio, f0_over_x_from_log_ratio,
                    log_mean_exp, mixture_log_density, ram_mc, sample_mixture,
                    standard_normal, subsample_mixture)


def toy_mixture():
    comps = [DiagonalGaussian([0.0, 0.0], [0.25, 0.25]),
             DiagonalGaussian([1.0, -1.0], [0.25, 0.5]),
             DiagonalGaussian([-2.0, 0.5], [1.0, 0.25])]
    return FiniteMixture(comps)


class TestLogMeanExp:
    def test_matches_naive_on_moderate_values(self):
        rng = np.random.default_rng(0)
        vals = rng.normal(size=(6, 9))
        naive = np.log(np.mean(np.exp(vals), axis=-1))
        assert_allclose(log_mean_exp(vals), naive, rtol=1e-12)

    def test_matches_scipy(self):
        rng = np.random.default_rng(1)
        vals = rng.normal(size=(5, 7)) * 50.0
        ref = logsumexp(vals, axis=-1) - math.log(7)
        assert_allclose(log_mean_exp(vals), ref, rtol=1e-12)

    def test_no_overflow_on_extremes(self):
        assert log_mean_exp(np.array([-2000.0, -2000.0])) == -2000.0
        assert log_mean_exp(np.array([1000.0, -1000.0])) == pytest.approx(
            1000.0 - math.log(2.0))

    def test_exact_permutation_invariance(self):
        # bit-identical, not merely close: the summation order is canonical
        rng = np.random.default_rng(2)
        vals = rng.normal(size=257) * 30.0
        base = log_mean_exp(vals)
        for _ in range(20):
            rng.shuffle(vals)
            assert log_mean_exp(vals) == base

    def test_axis_argument(self):
        vals = np.arange(12.0).reshape(3, 4)
        assert_allclose(log_mean_exp(vals, axis=0),
                        logsumexp(vals, axis=0) - math.log(3), rtol=1e-12)


class TestFiniteMixture:
    def test_log_density_matches_scipy(self):
        m = toy_mixture()
        rng = np.random.default_rng(3)
        pts = rng.standard_normal((30, 2)) * 2.0
        comp_log = np.stack([c.log_density(pts) for c in m.components], axis=-1)
        ref = logsumexp(comp_log, axis=-1) - math.log(m.n)
        assert_allclose(m.log_density(pts), ref, rtol=1e-12)
        assert_allclose(mixture_log_density(m, pts), ref, rtol=1e-12)

    def test_single_component_equals_component(self):
        comp = DiagonalGaussian([0.7], [0.3])
        m = FiniteMixture([comp])
        pts = np.linspace(-3, 3, 11)[:, None]
        assert_allclose(m.log_density(pts), comp.log_density(pts), rtol=1e-14)

    def test_single_point_scalar(self):
        m = toy_mixture()
        assert isinstance(m.log_density([0.0, 0.0]), float)

    def test_component_dimension_mismatch_rejected(self):
        with pytest.raises(DimensionError):
            FiniteMixture([DiagonalGaussian([0.0], [1.0]),
                           DiagonalGaussian([0.0, 0.0], [1.0, 1.0])])

    def test_empty_rejected(self):
        with pytest.raises(UsageError):
            FiniteMixture([])

    def test_sample_moments(self):
        m = toy_mixture()
        rng = np.random.default_rng(4)
        z = sample_mixture(m, rng, 300000)
        mean_ref = np.mean([c.mean for c in m.components], axis=0)
        assert_allclose(z.mean(axis=0), mean_ref, atol=0.02)
        # mixture covariance = mean of component covariances + spread of means
        cov_ref = np.diag(np.mean([c.variances for c in m.components], axis=0))
        mu = np.stack([c.mean for c in m.components])
        cov_ref = cov_ref + (mu - mean_ref).T @ (mu - mean_ref) / m.n
        assert_allclose(np.cov(z, rowvar=False), cov_ref, atol=0.03)

    def test_single_component_sampling_matches_component(self):
        comp = DiagonalGaussian([1.5, -0.5], [0.25, 0.75])
        m = FiniteMixture([comp])
        a = m.sample(np.random.default_rng(9), 64)
        b = comp.sample(np.random.default_rng(9), 64)
        assert np.array_equal(a, b)


class TestBuildMixture:
    def setup_method(self):
        rng = np.random.default_rng(5)
        self.model = LinearGaussianModel(A=rng.standard_normal((2, 20)) * 0.1,
                                         b=np.zeros(2), noise_var=0.25)

    def test_components_are_conditionals(self):
        rng = np.random.default_rng(6)
        xs = rng.standard_normal((4, 20))
        m = build_mixture(self.model, xs)
        assert m.n == 4
        for comp, x in zip(m.components, xs):
            ref = conditional(self.model, x)
            assert_allclose(comp.mean, ref.mean, rtol=1e-12)
            assert_allclose(comp.variances, ref.variances, rtol=1e-12)

    def test_wrong_input_dim_rejected(self):
        with pytest.raises(DimensionError):
            build_mixture(self.model, np.zeros((4, 19)))


class TestRamMc:
    def test_zero_when_mixture_equals_prior(self):
        p = standard_normal(2)
        m = FiniteMixture([DiagonalGaussian(p.mean, p.variances)])
        for kind in ("kl", "tv", "chisq", "sqhellinger", "js"):
            for prop in ProposalChoice:
                est = ram_mc(DivergenceSpec(kind), m, p, 128, prop,
                             np.random.default_rng(0))
                assert est.value == pytest.approx(0.0, abs=1e-12), (kind, prop)

    def test_prior_proposal_reconstruction(self):
        # same seed, manual recomputation of exactly the same draws and terms
        m = toy_mixture()
        p = standard_normal(2)
        spec = DivergenceSpec("kl")
        est = ram_mc(spec, m, p, 512, ProposalChoice.PRIOR, 42)
        rng = np.random.default_rng(42)
        z = p.sample(rng, 512)
        terms = f0_from_log_ratio(spec, m.log_density(z) - p.log_density(z))
        assert est.value == float(np.mean(terms))
        assert est.seed == 42
        assert est.m_samples == 512
        assert est.n_components == 3
        assert est.proposal is ProposalChoice.PRIOR

    def test_mixture_proposal_reconstruction(self):
        m = toy_mixture()
        p = standard_normal(2)
        spec = DivergenceSpec("chisq")
        est = ram_mc(spec, m, p, 256, ProposalChoice.MIXTURE, 7)
        rng = np.random.default_rng(7)
        z = m.sample(rng, 256)
        terms = f0_over_x_from_log_ratio(spec, m.log_density(z) - p.log_density(z))
        assert est.value == float(np.mean(terms))

    def test_generator_argument_leaves_seed_unset(self):
        m = toy_mixture()
        est = ram_mc(DivergenceSpec("kl"), m, standard_normal(2), 64,
                     ProposalChoice.PRIOR, np.random.default_rng(1))
        assert est.seed == -1

    def test_estimates_converge_to_closed_form_single_component(self):
        comp = DiagonalGaussian([1.0], [1.0])
        m = FiniteMixture([comp])
        p = standard_normal(1)
        truth = closed_form(DivergenceSpec("kl"), comp, p)   # 0.5
        for prop in ProposalChoice:
            est = ram_mc(DivergenceSpec("kl"), m, p, 400000, prop,
                         np.random.default_rng(8))
            assert est.value == pytest.approx(truth, abs=0.02), prop

    def test_finite_flag(self):
        m = toy_mixture()
        est = ram_mc(DivergenceSpec("kl"), m, standard_normal(2), 32,
                     ProposalChoice.PRIOR, 3)
        assert est.finite

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            ram_mc(DivergenceSpec("kl"), toy_mixture(), standard_normal(3),
                   32, ProposalChoice.PRIOR, 0)

    def test_sample_budget_validation(self):
        with pytest.raises(UsageError):
            ram_mc(DivergenceSpec("kl"), toy_mixture(), standard_normal(2),
                   0, ProposalChoice.PRIOR, 0)


class TestProposalChoice:
    def test_parse(self):
        assert ProposalChoice.parse("prior") is ProposalChoice.PRIOR
        assert ProposalChoice.parse("mixture") is ProposalChoice.MIXTURE
        with pytest.raises(UsageError):
            ProposalChoice.parse("importance")


class TestSubsample:
    def test_subsample_components_come_from_parent(self):
        m = toy_mixture()
        sub = subsample_mixture(m, 2, np.random.default_rng(0))
        assert sub.n == 2
        for comp in sub.components:
            assert any(comp is c for c in m.components)

    def test_size_validation(self):
        m = toy_mixture()
        for bad in (0, 4):
            with pytest.raises(UsageError):
                subsample_mixture(m, bad, np.random.default_rng(0))


class TestAssumptionProbes:
    def setup_method(self):
        rng = np.random.default_rng(10)
        self.model = LinearGaussianModel(A=rng.standard_normal((1, 20)) * 0.05,
                                         b=np.zeros(1), noise_var=0.49)
        self.xs = rng.standard_normal((6, 20))
        self.prior = standard_normal(1)

    def test_chi2_bound_is_max_over_components(self):
        bound = assumption_chi2_bound(self.model, self.xs, self.prior)
        spec = DivergenceSpec("chisq")
        ref = max(closed_form(spec, conditional(self.model, x), self.prior)
                  for x in self.xs)
        assert_allclose(bound, ref, rtol=1e-12)

    def test_chi2_bound_infinite_outside_regime(self):
        wide = LinearGaussianModel(A=np.zeros((1, 20)), b=np.zeros(1),
                                   noise_var=3.0)
        assert assumption_chi2_bound(wide, self.xs, self.prior) == math.inf

    def test_fourth_moment_is_one_when_equal(self):
        same = LinearGaussianModel(A=np.zeros((1, 20)), b=np.zeros(1),
                                   noise_var=1.0)
        val = assumption_fourth_moment(same, np.zeros((1, 20)), self.prior,
                                       1000, np.random.default_rng(0))
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_fourth_moment_matches_quadrature(self):
        # single component at the origin: E_p[(q/p)^4] by direct integration
        model = LinearGaussianModel(A=np.zeros((1, 20)), b=np.array([0.2]),
                                    noise_var=0.49)
        grid = np.linspace(-12, 12, 400001)
        lq = -0.5 * ((grid - 0.2) ** 2 / 0.49 + math.log(2 * math.pi * 0.49))
        lp = -0.5 * (grid**2 + math.log(2 * math.pi))
        ref = np.trapezoid(np.exp(4.0 * (lq - lp) + lp), grid)
        val = assumption_fourth_moment(model, np.zeros((1, 20)), self.prior,
                                       2000000, np.random.default_rng(1))
        assert val == pytest.approx(ref, rel=0.05)

    def test_fourth_moment_sample_budget_validation(self):
        with pytest.raises(UsageError):
            assumption_fourth_moment(self.model, self.xs, self.prior, 0,
                                     np.random.default_rng(0))
