"""Exception hierarchy shared by all modules."""


class DidInvarianceError(Exception):
    """Base class for every error raised by this package."""


class InputError(DidInvarianceError, ValueError):
    """Invalid arguments: empty inputs, non-finite values, bad weights."""


class DomainError(InputError):
    """A transform was applied outside the domain where it is defined."""


class MonotonicityError(InputError):
    """A transform failed to be strictly increasing on the given support."""


class SchemaError(InputError):
    """A required CSV column is missing."""

    def __init__(self, column: str):
        super().__init__(f"missing required column: {column!r}")
        self.column = column


class ParseError(InputError):
    """A CSV cell could not be parsed."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class ValidationError(InputError):
    """The data parsed but does not form a valid 2x2 design."""


class NumericalError(DidInvarianceError, ArithmeticError):
    """Inference could not be carried out on the supplied data."""
