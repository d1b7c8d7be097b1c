"""Exception hierarchy shared by the solvers and the command line."""


class DomainError(ValueError):
    """Input lies outside the domain where a quantity is defined."""


class PoleError(DomainError):
    """Argument sits at or beyond a pole of a tangent-type function."""

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class FocalPointError(DomainError):
    """A comparison function ``C_{kappa,Lambda}`` vanishes inside the interval.

    ``location`` is the first zero of the offending function.
    """

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class SolverError(RuntimeError):
    """Base class for numerical failures (as opposed to invalid input)."""


class IntegrationError(SolverError):
    pass


class BracketError(SolverError):
    pass


class ConvergenceError(SolverError):
    pass


class StabilityError(SolverError):
    pass
