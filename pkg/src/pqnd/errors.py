"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid scenario or detector configuration."""


class NumericError(ValueError):
    """Non-finite input handed to a special function."""


class ParseError(ValueError):
    """Malformed data file; ``lineno`` points at the offending line."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class OracleScopeError(RuntimeError):
    """Instance too large for a dense or exhaustive reference routine."""
