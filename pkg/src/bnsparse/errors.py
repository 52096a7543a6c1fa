"""Exception hierarchy shared by all modules."""


class BNError(Exception):
    """Base class for data and model errors raised by bnsparse."""


class FormatError(BNError):
    """Malformed input file (ragged CSV rows, bad headers, ...)."""


class MissingDataError(FormatError):
    """A data cell is empty; only complete data is supported."""


class SchemaViolation(BNError):
    """A value is not among the levels declared for its variable."""


class ConfigSpaceOverflow(BNError):
    """The parent-configuration space exceeds the configured cap."""


class DimensionError(BNError):
    """Node counts or schemas of two objects do not match."""


class CycleError(BNError):
    """An operation would introduce a directed cycle."""


class InvalidMove(BNError):
    """A move's precondition does not hold on the given DAG."""


class ResourceLimit(BNError):
    """Requested enumeration is too large."""


class ParseError(FormatError):
    """Syntax error in a network or DAG file."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class InvalidDistribution(BNError):
    """A probability row does not sum to one."""


class IncompleteTable(BNError):
    """A conditional probability table misses parent configurations."""
