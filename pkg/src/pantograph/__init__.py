"""Solver and analysis tools for pantograph equations ``x'(t) = F(x(q t))``."""

__version__ = "0.1.0"

from .core import (
    Degenerate,
    Field,
    PiecewiseHermite,
    Problem,
    Profile,
    Trajectory,
    breakpoints,
    field_invert,
    trajectory_deriv,
    trajectory_eval,
)
from .errors import (
    BreakpointError,
    CompatibilityError,
    ConvergenceError,
    DomainError,
    InversionBracketError,
    MissingDerivativeError,
    NotInvertibleError,
    NumericalError,
    PantographError,
    SolverOverflowError,
    UnsupportedOrderError,
    ValidationError,
)
from .linear import LinearProblem, linear_solution, phi_series, phi_taylor_coefficient
from .stepper import SolveConfig, advance_segment, bootstrap_degenerate, equation_residual, solve
from .reconstruct import check_compatibility, reconstruct_iterated, reconstruct_one
from .analysis import (
    AnalysisReport,
    analyze,
    derivative_jump,
    find_roots,
    first_root_bound,
    local_extrema,
    lyapunov_curve,
    oscillation_experiment,
    ratio_curve,
    regularity_count,
    regularity_ladder,
)
