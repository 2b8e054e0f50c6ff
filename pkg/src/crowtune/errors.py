"""Shared exception types."""


class CrowtuneError(Exception):
    """Base class for package errors."""


class DegenerateImageError(CrowtuneError):
    """Image has no usable statistics (zero variance or zero spectral energy).

    Raised by the fitness metrics and by reconstructions that produce
    non-finite values; the optimizer maps it to a penalty fitness.
    """


class OffGridError(CrowtuneError, ValueError):
    """A value does not lie on its parameter grid."""


class ConfigError(CrowtuneError, ValueError):
    """A run configuration is missing, malformed, or inconsistent."""
