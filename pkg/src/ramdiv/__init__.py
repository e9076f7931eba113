"""Mixture-based estimation of f-divergences between a sample-indexed
Gaussian mixture and a reference distribution.

The estimator targets D_f(Q || P) where Q is approximated by the equal-weight
mixture of conditionals over an i.i.d. input sample; the Monte-Carlo form
averages the stabilized integrand under either the reference ("prior") or
the mixture itself as proposal.  Closed forms for Gaussian pairs, derivative
dominance bounds, a synthetic linear-Gaussian benchmark family, serialization
and plotting round out the package; see the ``ramdiv`` CLI for the report
paths.
"""

from .errors import (DimensionError, DomainError, NumericalError, RamdivError,
                     UnsupportedError, UsageError)
from .experiments import (INPUT_DIM, REFERENCE_RATES, EstimateRecord, RateTable,
                          SweepConfig, SyntheticFamily, bias_curve,
                          chi2_bias_prediction, default_proposal,
                          entropy_estimate, fit_log_slope, make_family,
                          mi_tcpc_estimate, model_at, model_mutual_information,
                          rate_key, run_sweep, total_correlation_estimate)
from .fdiv import (CLOSED_FORM_KINDS, KINDS, DivergenceSpec, closed_form,
                   dominance_margins, f0, f0_from_log_ratio,
                   f0_over_x_from_log_ratio, f0_prime, lemma_bound_h,
                   parse_divergence, quadrature_divergence)
from .gaussian import (DiagonalGaussian, FullGaussian, LinearGaussianModel,
                       conditional, marginal, mean_and_covariance,
                       standard_normal)
from .kde import KdeModel, kde_fit, kde_log_density, plugin_estimate
from .mixture import (FiniteMixture, McEstimate, ProposalChoice,
                      assumption_chi2_bound, assumption_fourth_moment,
                      build_mixture, log_mean_exp, mixture_log_density, ram_mc,
                      sample_mixture, subsample_mixture)
from .reporting import (CSV_HEADER, records_from_csv, records_from_json,
                        records_to_csv, records_to_json)
from .streams import child_seed, stream

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "RamdivError", "DimensionError", "DomainError", "NumericalError",
    "UnsupportedError", "UsageError",
    # streams
    "child_seed", "stream",
    # gaussian
    "DiagonalGaussian", "FullGaussian", "LinearGaussianModel", "conditional",
    "marginal", "mean_and_covariance", "standard_normal",
    # fdiv
    "KINDS", "CLOSED_FORM_KINDS", "DivergenceSpec", "parse_divergence", "f0",
    "f0_prime", "f0_from_log_ratio", "f0_over_x_from_log_ratio", "closed_form",
    "quadrature_divergence", "lemma_bound_h", "dominance_margins",
    # mixture
    "ProposalChoice", "McEstimate", "FiniteMixture", "log_mean_exp",
    "build_mixture", "mixture_log_density", "sample_mixture", "ram_mc",
    "subsample_mixture", "assumption_chi2_bound", "assumption_fourth_moment",
    # kde
    "KdeModel", "kde_fit", "kde_log_density", "plugin_estimate",
    # experiments
    "INPUT_DIM", "SyntheticFamily", "SweepConfig", "EstimateRecord",
    "RateTable", "REFERENCE_RATES", "make_family", "model_at",
    "default_proposal", "run_sweep", "bias_curve", "fit_log_slope",
    "chi2_bias_prediction", "entropy_estimate", "mi_tcpc_estimate",
    "total_correlation_estimate", "model_mutual_information", "rate_key",
    # reporting
    "CSV_HEADER", "records_to_csv", "records_from_csv", "records_to_json",
    "records_from_json",
]
