"""Exception types shared across the package."""


class StreamfadeError(Exception):
    """Base class for package errors."""


class ConfigError(StreamfadeError, ValueError):
    """Invalid configuration. Carries the offending field name when known."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class NumericFailure(StreamfadeError, RuntimeError):
    """A numerical routine failed to reach its accuracy target."""
