"""Self-adaptive normal-beta-prime (NBP) shrinkage regression.

Gibbs sampling with embedded Monte Carlo EM for the prior hyperparameters, a
variational EM alternative, decoupled shrinkage-and-selection, simulation
benchmarks, and numerical probes of the model's analytic properties.
"""

from .bench import ExperimentSpec, MetricsReport, compute_metrics, cross_validated_mspe, gen_experiment, run_experiment
from .dss import DssResult, adaptive_lasso_cd, dss_select
from .errors import DataError, DomainError, NbpError, NumericError
from .gibbs import McemConfig, adaptive_config, em_update, gibbs_sweep, run_mcem
from .linalg import DiagScale, sample_conditional_beta, smw_solve
from .model import LatentState, NbpHyperparams, PosteriorSummary, RegressionData, standardize
from .rand_dist import (
    GigParams,
    RngStream,
    gig_expectations,
    inverse_gamma_expectations,
    sample_gig,
    sample_inverse_gamma,
)
from .specfun import digamma, dlog_bessel_k_dorder, inverse_digamma, log_bessel_k
from .theory import (
    generalized_dimension,
    lemma1_ratio,
    marginal_density,
    stochastic_dominance_check,
    tail_mass_bound,
)
from .varem import VarEmConfig, VariationalParams, cavi_step, elbo, run_var_em

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "DiagScale",
    "DomainError",
    "DssResult",
    "ExperimentSpec",
    "GigParams",
    "LatentState",
    "McemConfig",
    "MetricsReport",
    "NbpError",
    "NbpHyperparams",
    "NumericError",
    "PosteriorSummary",
    "RegressionData",
    "RngStream",
    "VarEmConfig",
    "VariationalParams",
    "adaptive_lasso_cd",
    "adaptive_config",
    "cavi_step",
    "compute_metrics",
    "cross_validated_mspe",
    "digamma",
    "dlog_bessel_k_dorder",
    "dss_select",
    "elbo",
    "em_update",
    "gen_experiment",
    "gibbs_sweep",
    "gig_expectations",
    "inverse_digamma",
    "inverse_gamma_expectations",
    "lemma1_ratio",
    "log_bessel_k",
    "marginal_density",
    "generalized_dimension",
    "run_experiment",
    "run_mcem",
    "run_var_em",
    "sample_conditional_beta",
    "sample_gig",
    "sample_inverse_gamma",
    "smw_solve",
    "standardize",
    "stochastic_dominance_check",
    "tail_mass_bound",
]
