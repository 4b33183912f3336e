"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: domain errors exit 2, numeric
errors exit 3, and I/O problems exit 4.
"""


class NbpError(Exception):
    """Base class for all package errors."""


class DomainError(NbpError):
    """Invalid argument: outside the mathematical domain of an operation."""

    exit_code = 2


class NumericError(NbpError):
    """A numerical procedure failed to converge or produced non-finite values."""

    exit_code = 3


class DataError(NbpError):
    """Malformed input file or unreadable/unwritable path."""

    exit_code = 4
