"""Exception types raised across the package."""


class PnDGError(Exception):
    """Base class for all package errors."""


class InputError(PnDGError, ValueError):
    """Malformed argument: wrong shape, out-of-range index, non-unit vector."""


class ConfigurationError(PnDGError, ValueError):
    """Physical or run configuration violates a modelling assumption."""


class SolverError(PnDGError, RuntimeError):
    """Linear solve failed; ``residual`` holds the last relative residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
