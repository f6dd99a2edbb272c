"""Exception hierarchy shared by every module of the package."""


class PantographError(Exception):
    """Base class for all errors raised by :mod:`pantograph`."""


class ValidationError(PantographError, ValueError):
    """Invalid problem, configuration or argument."""


class DomainError(PantographError, ValueError):
    """Evaluation requested outside the computed domain."""


class BreakpointError(DomainError):
    """A point of the breakpoint ladder was passed where it is excluded."""


class NotInvertibleError(PantographError):
    """The field has neither a declared inverse nor a usable monotone bracket."""


class InversionBracketError(NotInvertibleError):
    """The target value lies outside the image of the monotone bracket."""


class MissingDerivativeError(PantographError):
    """An operation needs the derivative of the initial profile."""


class CompatibilityError(PantographError):
    """The profile violates the junction condition eta'(a) = F(eta(qa))."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class NumericalError(PantographError, ArithmeticError):
    """Floating point failure during a solve (mapped to exit code 3 by the CLI)."""


class SolverOverflowError(NumericalError):
    """The state left the representable range; ``t_reached`` records how far we got."""

    def __init__(self, message, t_reached):
        super().__init__(message)
        self.t_reached = t_reached


class ConvergenceError(NumericalError):
    """Picard bootstrap failed even at the minimum step."""


class UnsupportedOrderError(PantographError, ValueError):
    """Derivative jump requested at an order finite differences cannot resolve."""
