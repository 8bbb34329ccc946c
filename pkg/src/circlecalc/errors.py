"""Exception types shared across the package."""


class CircleCalcError(Exception):
    """Base class for library errors."""


class KindMismatchError(CircleCalcError, TypeError):
    """Arithmetic between series of different scalar kinds."""


class ConstantTermError(CircleCalcError, ValueError):
    """A series has the wrong constant term for the requested operation."""


class ToleranceError(CircleCalcError, RuntimeError):
    """A certified error bound could not be brought below the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ValidationError(CircleCalcError, ValueError):
    """Invalid input description."""
