"""fracgreen: kernel construction and solvers for the implicit fractional
difference Dirichlet problem

    -D^v y(t) + alpha D^u y(t + v - u) = h(t + v - 1),
    y(v - 2) = y(v + b + 1) = 0,

with 1 < v < 2, 0 < u < 1 and |alpha| < 1.
"""

from .existence import (
    ExistenceReport,
    build_report,
    check_kz,
    compute_d,
    minimal_L,
    weighted_bound,
)
from .fracops import (
    FractionalOrder,
    convolve_shifted,
    forward_difference,
    fractional_difference,
    fractional_sum,
)
from .green import (
    GreenKernel,
    IVPState,
    SingularProblemError,
    apply_kernel,
    atici_eloe_kernel,
    build_kernel,
    dirichlet_state,
    ivp_solution,
    solve_linear,
    uniqueness_indicator,
)
from .grid import (
    Grid,
    GridFunction,
    index_of,
    make_forcing_grid,
    make_solution_grid,
)
from .mittag import MittagLefflerParams, ml, ml_profile
from .oracle import (
    CollocationSystem,
    SingularMatrixError,
    assemble,
    residual,
    solve_collocation,
)
from .problem import ProblemSpec
from .rtransform import (
    SequenceGenerator,
    r_transform,
    verify_convolution_lemma,
    verify_difference_lemma,
)
from .solver import (
    NonlinearRHS,
    SolveOutcome,
    apply_F,
    is_nontrivial,
    solve_newton,
    solve_picard,
)
from .special import (
    SignedLogValue,
    falling_factorial,
    gamma,
    log_gamma_signed,
)

__version__ = "0.1.0"

__all__ = [
    "CollocationSystem",
    "ExistenceReport",
    "FractionalOrder",
    "GreenKernel",
    "Grid",
    "GridFunction",
    "IVPState",
    "MittagLefflerParams",
    "NonlinearRHS",
    "ProblemSpec",
    "SequenceGenerator",
    "SignedLogValue",
    "SingularMatrixError",
    "SingularProblemError",
    "SolveOutcome",
    "apply_F",
    "apply_kernel",
    "assemble",
    "atici_eloe_kernel",
    "build_kernel",
    "build_report",
    "check_kz",
    "compute_d",
    "convolve_shifted",
    "dirichlet_state",
    "falling_factorial",
    "forward_difference",
    "fractional_difference",
    "fractional_sum",
    "gamma",
    "index_of",
    "is_nontrivial",
    "ivp_solution",
    "log_gamma_signed",
    "make_forcing_grid",
    "make_solution_grid",
    "minimal_L",
    "ml",
    "ml_profile",
    "r_transform",
    "residual",
    "solve_collocation",
    "solve_linear",
    "solve_newton",
    "solve_picard",
    "uniqueness_indicator",
    "verify_convolution_lemma",
    "verify_difference_lemma",
    "weighted_bound",
]
