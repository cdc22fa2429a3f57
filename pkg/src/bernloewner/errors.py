"""Exception types shared across the package."""


class BernLoewnerError(Exception):
    """Base class for all library errors."""


class DomainError(BernLoewnerError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class NonConvergenceError(BernLoewnerError, RuntimeError):
    """The adaptive integrator exhausted its step budget.

    ``trajectory`` holds the accepted ``(t, y)`` pairs computed so far.
    """

    def __init__(self, message, trajectory=()):
        super().__init__(message)
        self.trajectory = list(trajectory)


class QuadratureError(BernLoewnerError, RuntimeError):
    """Quadrature could not meet its tolerance within the panel budget."""


class IntegrabilityError(BernLoewnerError, ValueError):
    """A measure fails the integrability class an operation needs."""


class NoBRFPError(BernLoewnerError, ValueError):
    """A boundary regular fixed point required by the operation is absent."""


class SingularPathError(BernLoewnerError, ValueError):
    """The integrand of a path integral vanishes on the path."""


class ParseError(BernLoewnerError, ValueError):
    """Malformed or non-conforming JSON input."""
