"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DegenerateGeometryError(ValueError):
    """Positions coincide or the UAV is not above ground."""


class InstanceTooLargeError(ValueError):
    """Exhaustive enumeration would exceed the configured size limit."""


class ConfigError(ValueError):
    """A scenario file or configuration value is invalid."""


class TrainingDivergenceError(RuntimeError):
    """A SAC loss or parameter became non-finite."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
