"""Exception hierarchy shared by all modules.

Each class carries the process exit code the CLI maps it to.
"""


class IGIdentError(Exception):
    exit_code = 2


class InvalidInputError(IGIdentError, ValueError):
    """Malformed arguments: non-finite values, empty vectors, length mismatches."""

    exit_code = 2


class DomainError(IGIdentError, ValueError):
    """Arguments outside the mathematical domain of an operation."""

    exit_code = 2


class PreconditionError(DomainError):
    """A documented precondition of a check does not hold."""


class PackingInfeasibleError(IGIdentError):
    """Fewer than two codewords could be placed at the requested distance."""

    exit_code = 3


class RunawayPathError(IGIdentError):
    """A simulated path exceeded the first-passage safety cap."""

    exit_code = 4
