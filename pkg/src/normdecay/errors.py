"""Exception hierarchy.

Every error raised on purpose by the package derives from NormDecayError so
callers (and the command line front end) can catch them in one place.
"""

from __future__ import annotations


class NormDecayError(Exception):
    """Base class for all package errors."""


class InvalidMeasure(NormDecayError, ValueError):
    pass


class MeasureEmpty(NormDecayError, ValueError):
    """The measure has zero total mass, so its orbit norm has no logarithm."""


class ExprSyntaxError(NormDecayError, ValueError):
    """Parse failure with the byte offset where it happened.

    ``expected`` is the sorted tuple of token descriptions that would have
    been accepted at that position.
    """

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)
        self.reason = message


class DomainError(NormDecayError, ArithmeticError):
    """Expression evaluated outside its real domain."""


class InvalidModel(NormDecayError, ValueError):
    def __init__(self, message: str, field: str | None = None, offset: int | None = None):
        super().__init__(message)
        self.field = field
        self.offset = offset


class OptimizationFailure(NormDecayError, RuntimeError):
    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        if bracket is not None:
            message = f"{message} (bracket [{bracket[0]!r}, {bracket[1]!r}])"
        super().__init__(message)
        self.bracket = bracket


class NotMonotone(NormDecayError, ValueError):
    pass


class DegenerateWindow(NormDecayError, ValueError):
    pass


class SpectrumOnAxis(NormDecayError, ValueError):
    """The spectrum touches the imaginary axis, so resolvent bounds do not apply."""


class OutOfRange(NormDecayError, ValueError):
    pass


class RateViolation(NormDecayError, RuntimeError):
    pass


class Inconsistent(NormDecayError, ValueError):
    pass


class ConfigError(NormDecayError, ValueError):
    """Malformed configuration document or command line value."""

    def __init__(self, message: str, field: str | None = None, offset: int | None = None):
        super().__init__(message)
        self.field = field
        self.offset = offset
