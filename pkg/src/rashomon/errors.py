"""Exception hierarchy.

Two branches matter for the CLI exit-code contract: ``UsageError`` maps to
exit code 2 and ``DataError`` to exit code 3.  Timeouts are not exceptions;
long-running searches return partial results carrying a ``complete`` flag.
"""


class RashomonError(Exception):
    """Base class for all package errors."""


class UsageError(RashomonError):
    """Caller passed an invalid parameter or combination of parameters."""


class InvalidFractionError(UsageError):
    """A ratio argument is outside its documented range."""


class InvalidParameterError(UsageError):
    """A count or mode argument is outside its documented range."""


class IndexOutOfRangeError(UsageError):
    """A feature index does not exist in the dataset."""


class DuplicateTermError(UsageError):
    """A term id was appended twice to the same prefix."""


class EmptyVocabularyError(UsageError):
    """The operation needs at least one candidate term."""


class DataError(RashomonError):
    """Input data violates the documented file or shape contracts."""


class MissingColumnError(DataError):
    """A named CSV column is absent from the header."""

    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} not found in header")


class NonBinaryValueError(DataError):
    """A CSV cell is not the literal string '0' or '1'.

    ``row`` is the 1-based data row (header excluded), ``column`` the header
    name of the offending cell.
    """

    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"non-binary value {value!r} at row {row}, column {column!r}")


class EmptyDatasetError(DataError):
    """The dataset contains zero examples."""


class LengthMismatchError(DataError):
    """A bitvector's length differs from the expected example count."""


class DuplicateNameError(DataError):
    """Two terms or columns share a name that must be unique."""


class NoPositivesError(DataError):
    """Positive-coverage mining requested on a dataset with no positives."""


class EmptySetError(DataError):
    """A model-set metric was asked of an empty collection."""


class EmptyGroupError(DataError):
    """A fairness criterion's conditioning group contains no examples."""
