"""Clock-offset estimation for two-way timing message exchanges.

The package simulates timestamp exchanges under Gaussian, log-normal and
exponential delay likelihoods, computes closed-form maximum-likelihood and
factor-graph (Bayesian max-product) offset estimates, evaluates classical and
Bayesian variance lower bounds, and reproduces the reference Monte-Carlo MSE
experiments through a CLI (``clocksync``).
"""

from .bounds import (
    BiasPair,
    BoundReport,
    bchrb,
    bcrb,
    chrb,
    crb,
    ml_mse_oracle,
    mse_bound_theta,
    zeta,
    zeta_monte_carlo,
)
from .exchange import (
    ExchangeParams,
    GaussMarkovParams,
    GroundTruthTrace,
    ObservationSeries,
    TimestampQuad,
    TrialStreams,
    d_from_xi_psi,
    derive_uv,
    simulate_gauss_markov,
    simulate_static,
    theta_from_xi_psi,
)
from .experiments import ExperimentConfig, MseRecord, emit_csv, preset_config, run_trials
from .factor_graph import (
    BackwardCoefficients,
    FgeEstimate,
    backward_coefficients,
    composition_estimate,
    exponential_closed_form,
    fge_theta,
    forward_estimates,
    g_apply,
    xi0_estimate,
)
from .likelihoods import (
    Exponential,
    Gaussian,
    LikelihoodModel,
    LogNormal,
    empirical_sigma_eta_sq,
    make_model,
    model_label,
)
from .ml import MlEstimate, ml_constrained, ml_theta, ml_unconstrained

__version__ = "0.1.0"

__all__ = [
    "BiasPair",
    "BoundReport",
    "BackwardCoefficients",
    "ExchangeParams",
    "ExperimentConfig",
    "Exponential",
    "FgeEstimate",
    "Gaussian",
    "GaussMarkovParams",
    "GroundTruthTrace",
    "LikelihoodModel",
    "LogNormal",
    "MlEstimate",
    "MseRecord",
    "ObservationSeries",
    "TimestampQuad",
    "TrialStreams",
    "backward_coefficients",
    "bchrb",
    "bcrb",
    "chrb",
    "composition_estimate",
    "crb",
    "d_from_xi_psi",
    "derive_uv",
    "emit_csv",
    "empirical_sigma_eta_sq",
    "exponential_closed_form",
    "fge_theta",
    "forward_estimates",
    "g_apply",
    "make_model",
    "ml_constrained",
    "ml_mse_oracle",
    "ml_theta",
    "ml_unconstrained",
    "model_label",
    "mse_bound_theta",
    "preset_config",
    "run_trials",
    "simulate_gauss_markov",
    "simulate_static",
    "theta_from_xi_psi",
    "xi0_estimate",
    "zeta",
    "zeta_monte_carlo",
]
