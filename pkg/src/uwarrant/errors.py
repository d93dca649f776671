"""Exception hierarchy shared by the numerical modules and the CLI."""


class UWarrantError(Exception):
    """Base class for every error raised by uwarrant."""


class DomainError(UWarrantError, ValueError):
    """An argument lies outside the domain of the operation."""


class IntegrationError(UWarrantError, ArithmeticError):
    """Quadrature or ODE integration failed to produce a finite, converged value.

    ``time`` is set when an ODE integration blew up at a known instant.
    """

    def __init__(self, message, *, time=None):
        super().__init__(message)
        self.time = time


class DivergenceError(IntegrationError):
    """The expectation integral is infinite; ``c`` is the offending exponent."""

    def __init__(self, message, *, c=None):
        super().__init__(message)
        self.c = c


class NonConvergenceError(UWarrantError, RuntimeError):
    """An iterative solver stopped without meeting its tolerance.

    ``last`` holds the final iterate (a mapping of names to values) so callers
    can report where the solver gave up.
    """

    def __init__(self, message, *, last=None):
        super().__init__(message)
        self.last = dict(last or {})


class InfeasibleError(NonConvergenceError):
    """No root exists inside the admissible region of the calibration system."""
