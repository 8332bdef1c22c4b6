"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class EstimationError(ValueError):
    """Parameter estimation failed (e.g. moment ratio out of range)."""


class ConvergenceError(RuntimeError):
    """A root finder or solver did not converge / could not bracket."""


class RegimeError(ValueError):
    """Operation requested in the wrong peeling regime (sub/super-critical)."""


class ConfigError(ValueError):
    """Malformed experiment configuration."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
