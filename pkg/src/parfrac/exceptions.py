"""Exception hierarchy.

Validation problems derive from :class:`ValueError`; numerical breakdowns
(singular shifted systems, zero pivots) derive from :class:`ArithmeticError`
so callers such as the CLI can map them to different exit codes.
"""


class ParfracError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ParfracError, ValueError):
    pass


class NumericalError(ParfracError, ArithmeticError):
    pass


class DuplicateShift(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class UnderDetermined(ValidationError):
    pass


class InvalidShift(ValidationError):
    pass


class SumRuleViolation(ValidationError):
    pass


class UnknownMethod(ValidationError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown method"


class InvalidFunction(ValidationError):
    pass


class NonUnitConstant(ValidationError):
    pass


class OutOfConvergenceRadius(ValidationError):
    """Argument lies outside the domain where the error bound converges.

    ``x_conv`` holds the radius so callers can fall back to it.
    """

    def __init__(self, message, x_conv):
        super().__init__(message)
        self.x_conv = x_conv


class SingularShift(NumericalError):
    def __init__(self, message, shift=None, pivot=None):
        super().__init__(message)
        self.shift = shift
        self.pivot = pivot


class ZeroPivot(NumericalError):
    def __init__(self, message, index=None, shift=None):
        super().__init__(message)
        self.index = index
        self.shift = shift
