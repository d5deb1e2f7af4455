"""Exception hierarchy shared by all modules.

The CLI maps ``ValidationError`` to exit code 2 and ``DataError`` to exit code 3.
"""


class SelectionError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(SelectionError, ValueError):
    """A parameter or value is outside its allowed domain."""


class DimensionError(ValidationError):
    """An assignment or vector has the wrong length."""


class CapacityError(ValidationError):
    """A problem is too large for the requested exhaustive method."""


class DataError(SelectionError):
    """An input file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class ConsistencyError(DataError):
    """Input files disagree with each other (e.g. unknown or missing test ids)."""
