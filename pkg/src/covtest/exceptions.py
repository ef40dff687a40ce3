"""Exception hierarchy shared by every module."""


class CovTestError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CovTestError, ValueError):
    """Invalid user input: non-finite entries, bad shapes, contract violations."""


class NumericalError(CovTestError, ArithmeticError):
    """Base class for failures of the general-position assumptions."""


class SingularityError(NumericalError):
    """An active submatrix lost full column rank.

    ``index`` is the column whose addition (or presence) broke the rank.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegeneracyError(NumericalError):
    """Two candidate knots coincide, so the path is not uniquely defined."""


class SignConditionError(CovTestError):
    """The reduced solution changed sign, so the knot form does not apply.

    ``index`` is the first active coordinate whose sign disagrees.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class OutOfRangeError(CovTestError, ValueError):
    """A requested lambda lies below the computed part of the path."""
