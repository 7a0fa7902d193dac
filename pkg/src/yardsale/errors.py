"""Shared exception types."""


class StabilityError(RuntimeError):
    """A solver step violated its stability bound or produced unusable state."""


class InsufficientDataError(ValueError):
    """Not enough data points for the requested statistical fit."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""
