"""Exception hierarchy shared by every module."""


class NalabError(Exception):
    """Base class for all package errors."""


class DimensionError(NalabError, ValueError):
    """Vector or block dimensions do not match."""


class ConfigError(NalabError, ValueError):
    """Invalid configuration; ``field`` names the offending key when known."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class SolverError(NalabError, RuntimeError):
    """An iterative solve did not certify its answer within tolerance."""

    def __init__(self, message, value=None, gap=None):
        super().__init__(message)
        self.value = value
        self.gap = gap


class DependenceError(NalabError, ValueError):
    """Vectors required to be linearly independent are not."""


class AttainmentError(NalabError, ValueError):
    """A functional does not attain its norm where it was claimed to."""


class AmbiguousSupportError(NalabError, ValueError):
    """The supporting functional is not unique (non-smooth point)."""


class SeparationError(NalabError, ValueError):
    """The dual net does not separate points of the space."""


class ReportError(NalabError, OSError):
    """A report artifact could not be written."""
