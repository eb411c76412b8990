"""Error types raised by the reconstruction library.

Management commands map these onto exit codes: data problems exit with 2,
usage problems with 1.
"""


class ShadowfitError(Exception):
    """Base class for every error raised by functional_shadows."""


class DomainError(ShadowfitError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class UndefinedPointError(DomainError):
    """A loss was requested at an x with no recorded counts."""

    def __init__(self, x):
        self.x = x
        super().__init__(f'no counts recorded at x={x!r}')


class EmptyTableError(ShadowfitError, ValueError):
    """A count table (or a simulation request) holds no events at all."""


class TableParseError(ShadowfitError, ValueError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f'row {row}: {message}'
        super().__init__(message)


class ConfigError(ShadowfitError, ValueError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f'{key}: {message}')


class PreconditionError(ShadowfitError, ValueError):
    """Inputs violate a stated precondition (too few replicates, empty suite, ...)."""
