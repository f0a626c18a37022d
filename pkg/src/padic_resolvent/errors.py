"""Exception hierarchy for the p-adic resolvent toolkit."""

from __future__ import annotations


class PadicError(Exception):
    """Base class for all library errors."""


class InvalidInputError(PadicError, ValueError):
    """A precondition on an argument was violated (dimension, prime, backend, range)."""


class SingularElementError(PadicError, ZeroDivisionError):
    """Inversion of zero, or of a capped value that is zero to its known precision."""


class SingularMatrixError(PadicError):
    """A linear solve met a non-invertible matrix (1/lambda is an eigenvalue)."""


class DomainError(PadicError):
    """A series evaluation was requested outside its certified convergence domain."""


class OutOfRadiusError(DomainError):
    """Recentered expansion terms do not decay: target point is outside the disk."""


class InternalConsistencyError(PadicError):
    """Two exact routes to the same value disagreed beyond the precision-exhaustion guard."""


class HypothesisViolationError(PadicError, ValueError):
    """An operator system declares a domain hypothesis its powers cannot certify."""


class SpecParseError(PadicError, ValueError):
    """A spec document failed to parse; carries the offending field location."""

    def __init__(self, message: str, location: str = "") -> None:
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
