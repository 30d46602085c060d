"""Exception types raised across the package."""


class CurvedOptError(Exception):
    """Base class for all package errors."""


class ZeroPoint(CurvedOptError, ValueError):
    """A (sub)gradient was requested at the origin."""


class UnsupportedKind(CurvedOptError, NotImplementedError):
    """The body kind has no closed form for the requested operation."""


class DegenerateBody(CurvedOptError, ValueError):
    """The body is not full dimensional, unbounded, or cannot be sampled."""


class BodySpecError(CurvedOptError, ValueError):
    """A body specification document violates one of its invariants."""


class IterationLimit(CurvedOptError, RuntimeError):
    """An iterative method stopped before certifying the requested precision.

    The best result found so far is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class AdversaryViolation(CurvedOptError, RuntimeError):
    """An adversary emitted a gain (or hint) that breaks its own contract."""


class InfeasibleAction(CurvedOptError, RuntimeError):
    """A learner played a point outside the playing set."""


class DomainError(CurvedOptError, ValueError):
    """Input outside the mathematical domain of a check."""


class InfeasibleStart(CurvedOptError, ValueError):
    """Frank-Wolfe was started from a point outside the feasible body."""


class OracleFailure(CurvedOptError, RuntimeError):
    """A linear-optimization oracle failed to return a certified answer."""
