"""Exception taxonomy, mirrored by the CLI exit codes."""

from __future__ import annotations


class LapexpError(Exception):
    """Base class for all lapexp errors."""


class SpecError(LapexpError):
    """Malformed problem specification / unparseable input (exit code 2)."""


class HypothesisViolationError(LapexpError):
    """An expansion hypothesis fails on the supplied data (exit code 3)."""


class DegenerateMinimumError(HypothesisViolationError):
    """The quadratic form at the minimum is not positive definite."""


class InvalidMinimumError(HypothesisViolationError):
    """f does not have value 0 and vanishing gradient at the origin."""


class PathwayMismatchError(HypothesisViolationError):
    """The requested coefficient pathway does not apply to the input."""


class AccuracyError(LapexpError):
    """Numerical quadrature failed to converge (exit code 5).

    ``best`` holds the most refined value obtained before giving up.
    """

    def __init__(self, message: str, best=None, error=None):
        super().__init__(message)
        self.best = best
        self.error = error
