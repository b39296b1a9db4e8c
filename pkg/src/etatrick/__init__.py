"""Sparse penalties, their quadratic dual forms, and adaptive-dropout solvers."""

__version__ = "0.1.0"

from .penalties import (  # noqa: F401
    L0,
    L1,
    ElasticNet,
    HardThresh,
    Huber,
    LogSum,
    LpNorm,
    LpPow,
    Mcp,
    Penalty,
    Scad,
    eta_hat,
    eta_in_domain,
    f_dual,
    omega,
    parse_penalty,
    quad_over_eta,
    top_k_indices,
)
from .duality import (  # noqa: F401
    DualPairReport,
    EmptyDomainError,
    Minimize1DOptions,
    NonMonotoneUpdateError,
    check_dual_pair,
    eta_hat_from_omega,
    f_from_omega,
    omega_from_eta_hat,
    omega_from_f,
    subquadratic_check,
)
from .specialfn import (  # noqa: F401
    DepthExceededError,
    QuadratureOptions,
    dawson,
    kl_integrand,
    kl_loguniform,
    quad_adaptive,
)
from .dropout import (  # noqa: F401
    BiasedBernoulliMask,
    DegenerateMaskError,
    GaussianMask,
    HardConcreteL0,
    HardConcreteMask,
    InversionFailedError,
    MagnitudePruning,
    MaskModel,
    MethodSpec,
    NotStandardizedError,
    ScalarUnsupportedError,
    Standout,
    UnbiasedBinaryMask,
    VariationalDropout,
    alpha_from_eta,
    biased_reparam,
    effective_penalty,
    effective_penalty_vector,
    eta_from_alpha,
    expected_linear_loss,
    hardconcrete_a_from_eta,
    hardconcrete_active_prob,
    hardconcrete_eta_tilde,
    hardconcrete_penalty_raw,
    magnitude_pruning_eta_hat,
    mask_moments,
    mc_linear_loss,
    parse_method,
    pruning_schedule,
    sample_mask,
    scaled_effective_penalty,
    standout_eta_hat,
    standout_omega,
    standout_scaled_omega,
    vardrop_f,
)
from .solvers import (  # noqa: F401
    Problem,
    SingularSystemError,
    SolutionMetrics,
    SolverConfig,
    Trace,
    ZeroColumnError,
    ada_prox,
    ada_tikhonov,
    additive_reparam_prox,
    direct_gd,
    dropout_sgd,
    iht,
    irls,
    joint_gd,
    solution_metrics,
    standardize,
    unscale_coefficients,
)
from .cli import gen_synthetic, main  # noqa: F401
