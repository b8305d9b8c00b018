"""Exception types shared across the package."""


class CoverClustError(Exception):
    """Base class for package errors."""


class DimensionMismatchError(CoverClustError, ValueError):
    """Two geometric objects live in spaces of different dimension."""


class ParameterError(CoverClustError, ValueError):
    """A configuration value violates a documented constraint.

    ``constraint`` names the violated rule so callers (the CLI in
    particular) can report it verbatim.
    """

    def __init__(self, constraint: str, message: str | None = None):
        self.constraint = constraint
        super().__init__(message or constraint)


class InputError(CoverClustError, ValueError):
    """A dataset record could not be parsed or failed validation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
