"""Implicit-explicit multistep integrators for semilinear parabolic
problems, with the stability and convergence tooling around them.

The pieces compose bottom-up: ``bdf_coeffs`` produces the rational
scheme coefficients, ``stability`` analyses them (sector angles,
thresholds, root sweeps, numerical-range constants), ``operators`` and
``norms`` supply discretized problems and ways to measure them,
``imex_stepper`` advances solutions, and ``convergence_harness`` wraps
manufactured-solution studies.  ``cli`` exposes the lot as the
``imexbdf`` command.
"""

from .bdf_coeffs import (
    MAX_STEP_NUMBER,
    BdfScheme,
    OrderConditionReport,
    bdf_scheme,
    delta_coeffs,
    gamma_coeffs,
    mu_coeffs,
    verify_order_conditions,
)
from .config import (
    BuiltProblem,
    RunConfig,
    build_nonlinearity,
    build_problem,
    override,
    parse_config,
)
from .convergence_harness import (
    ConsistencyResult,
    ConvergenceReport,
    ConvergenceRow,
    ManufacturedProblem,
    OrderFit,
    ThresholdReport,
    ThresholdRow,
    consistency_errors,
    convergence_study,
    default_threshold_ratios,
    fit_order,
    scalar_convergence_study,
    threshold_experiment,
)
from .errors import (
    CoercivityError,
    ComputationError,
    ConfigError,
    DomainError,
    FitError,
    ImexBdfError,
    ReportError,
    StepError,
    UnsupportedOperationError,
)
from .imex_stepper import (
    DIVERGENCE_FACTOR,
    Trajectory,
    bootstrap_starting_values,
    imex_step,
    make_starting_values,
    run,
)
from .norms import (
    H1,
    L2,
    LINF,
    W1INF,
    NormKind,
    NormPart,
    difference_quotient_seq,
    lp_time_norm,
    parse_norm_token,
    spatial_norm,
)
from .operators import (
    DIRICHLET,
    PERIODIC,
    DivergenceFormTerm,
    GradientFormTerm,
    Grid,
    LaplacianPointwiseTerm,
    LinearOperator,
    NonlinearTerm,
    PointwiseTerm,
    ScaledSumTerm,
    SparseDiffusionOperator,
    SpectralDiagonalOperator,
    ZeroTerm,
    assemble_example1,
    assemble_example2,
    assemble_example3,
    assemble_example4,
    default_cubic_sink,
    default_gradient_drag,
    dirichlet_grid,
    double_well_drift,
    fourier_frequencies,
    hermitian_parts,
    periodic_grid,
)
from .stability import (
    CoefficientLambda,
    RootSweepResult,
    StabilityReport,
    a_alpha_angle,
    angle_of_analyticity_check,
    coefficient_lambda,
    lambda_threshold,
    numerical_range_boundary,
    stability_constant,
    stability_report,
    von_neumann_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "MAX_STEP_NUMBER",
    "BdfScheme",
    "OrderConditionReport",
    "bdf_scheme",
    "delta_coeffs",
    "gamma_coeffs",
    "mu_coeffs",
    "verify_order_conditions",
    "BuiltProblem",
    "RunConfig",
    "build_nonlinearity",
    "build_problem",
    "override",
    "parse_config",
    "ConsistencyResult",
    "ConvergenceReport",
    "ConvergenceRow",
    "ManufacturedProblem",
    "OrderFit",
    "ThresholdReport",
    "ThresholdRow",
    "consistency_errors",
    "convergence_study",
    "default_threshold_ratios",
    "fit_order",
    "scalar_convergence_study",
    "threshold_experiment",
    "CoercivityError",
    "ComputationError",
    "ConfigError",
    "DomainError",
    "FitError",
    "ImexBdfError",
    "ReportError",
    "StepError",
    "UnsupportedOperationError",
    "DIVERGENCE_FACTOR",
    "Trajectory",
    "bootstrap_starting_values",
    "imex_step",
    "make_starting_values",
    "run",
    "H1",
    "L2",
    "LINF",
    "W1INF",
    "NormKind",
    "NormPart",
    "difference_quotient_seq",
    "lp_time_norm",
    "parse_norm_token",
    "spatial_norm",
    "DIRICHLET",
    "PERIODIC",
    "DivergenceFormTerm",
    "GradientFormTerm",
    "Grid",
    "LaplacianPointwiseTerm",
    "LinearOperator",
    "NonlinearTerm",
    "PointwiseTerm",
    "ScaledSumTerm",
    "SparseDiffusionOperator",
    "SpectralDiagonalOperator",
    "ZeroTerm",
    "assemble_example1",
    "assemble_example2",
    "assemble_example3",
    "assemble_example4",
    "default_cubic_sink",
    "default_gradient_drag",
    "dirichlet_grid",
    "double_well_drift",
    "fourier_frequencies",
    "hermitian_parts",
    "periodic_grid",
    "CoefficientLambda",
    "RootSweepResult",
    "StabilityReport",
    "a_alpha_angle",
    "angle_of_analyticity_check",
    "coefficient_lambda",
    "lambda_threshold",
    "numerical_range_boundary",
    "stability_constant",
    "stability_report",
    "von_neumann_sweep",
    "__version__",
]
