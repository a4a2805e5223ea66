"""Solver and dependence-bound certificates for Hilfer fractional Cauchy problems.

The package solves D^{alpha,beta} y = f(x, y) with the weighted initial
condition I^{1-gamma} y(a) = y_a by successive approximations on
contraction-sized subintervals, working throughout with the continuous
weighted companion w(x) = (x-a)^{1-gamma} y(x).  Companion modules
provide the fractional operators, the Mittag-Leffler and Gronwall
machinery behind the continuous-dependence certificates, a small
expression language for right-hand sides, and a CLI.
"""

from .bounds import (
    BoundCertificate,
    gronwall_envelope,
    ic_perturbation_bound,
    ic_perturbation_certificate,
    order_perturbation_B,
    order_perturbation_envelope,
)
from .errors import (
    CoverageError,
    EvalDomainError,
    HilferError,
    MeshMismatchError,
    OutOfDomainError,
    PicardConvergenceError,
    RhsNameError,
    RhsSyntaxError,
    SeriesConvergenceError,
    SingularEndpointError,
    ValidationError,
)
from .fracops import (
    DEFAULT_TOL_QUAD,
    FracOrder,
    hilfer_derivative,
    residual,
    rl_derivative,
    rl_integral,
)
from .meshes import (
    Mesh,
    WeightedGridFunction,
    eval_weighted,
    eval_y,
    read_solution_csv,
    weighted_distance,
    weighted_norm,
    write_solution_csv,
)
from .picard import (
    ProblemSpec,
    SolveReport,
    SolverConfig,
    apriori_error_bound,
    choose_subintervals,
    contraction_step_limit,
    history_term,
    initial_iterate,
    picard_step,
    solve,
    volterra_residual,
)
from .rhs import (
    RhsExpr,
    builtin_rhs,
    estimate_lipschitz,
    eval_rhs,
    format_rhs,
    parse_rhs,
)
from .special import (
    GAMMA_OVERFLOW_THRESHOLD,
    ML_MAX_ABS_Z,
    MlParams,
    gamma,
    log_gamma,
    mittag_leffler,
)

__version__ = "0.1.0"

__all__ = [
    "BoundCertificate",
    "CoverageError",
    "DEFAULT_TOL_QUAD",
    "EvalDomainError",
    "FracOrder",
    "GAMMA_OVERFLOW_THRESHOLD",
    "HilferError",
    "ML_MAX_ABS_Z",
    "Mesh",
    "MeshMismatchError",
    "MlParams",
    "OutOfDomainError",
    "PicardConvergenceError",
    "ProblemSpec",
    "RhsExpr",
    "RhsNameError",
    "RhsSyntaxError",
    "SeriesConvergenceError",
    "SingularEndpointError",
    "SolveReport",
    "SolverConfig",
    "ValidationError",
    "WeightedGridFunction",
    "apriori_error_bound",
    "builtin_rhs",
    "choose_subintervals",
    "contraction_step_limit",
    "estimate_lipschitz",
    "eval_rhs",
    "eval_weighted",
    "eval_y",
    "format_rhs",
    "gamma",
    "gronwall_envelope",
    "hilfer_derivative",
    "history_term",
    "ic_perturbation_bound",
    "ic_perturbation_certificate",
    "initial_iterate",
    "log_gamma",
    "mittag_leffler",
    "order_perturbation_B",
    "order_perturbation_envelope",
    "parse_rhs",
    "picard_step",
    "read_solution_csv",
    "residual",
    "rl_derivative",
    "rl_integral",
    "solve",
    "volterra_residual",
    "weighted_distance",
    "weighted_norm",
    "write_solution_csv",
]
