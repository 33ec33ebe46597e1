"""Exception types shared across delaylab.

Every error raised deliberately by this package derives from DelayLabError,
so callers can catch one type at the CLI boundary and map it to an exit code.
"""


class DelayLabError(Exception):
    """Base class for all delaylab errors."""


class NonFiniteError(DelayLabError):
    """Input contains NaN or Inf entries."""


class DimensionMismatchError(DelayLabError):
    """Operand shapes are incompatible with the requested operation."""


class NotHermitianError(DelayLabError):
    """Matrix fails the Hermitian symmetry check."""


class RankDeficientError(DelayLabError):
    """Matrix is numerically rank-deficient where full rank is required."""


class IndexOutOfRangeError(DelayLabError):
    """A step or lag index falls outside the available history."""


class InvalidParamsError(DelayLabError):
    """Parameter values violate a documented precondition."""


class InvalidRangeError(DelayLabError):
    """A scalar argument lies outside its admissible range."""


class OutOfRegimeError(DelayLabError):
    """The requested bound does not apply in this parameter regime."""


class OutOfBudgetError(DelayLabError):
    """Requested problem size exceeds the configured safety budget."""


class SchemaMismatchError(DelayLabError):
    """A delimited file does not match the expected column schema."""
