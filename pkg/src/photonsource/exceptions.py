"""Exception types raised by photonsource."""


class PhotonSourceError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PhotonSourceError, ValueError):
    """Invalid or incomplete parameters / run configuration."""


class NumericalInstabilityError(PhotonSourceError, ArithmeticError):
    """A closed-form evaluation lost too much precision to be trusted."""


class IntegrationError(PhotonSourceError, RuntimeError):
    """The ODE integrator failed (e.g. step-size underflow)."""

    def __init__(self, message, *, t_failed=None, diagnostics=None):
        super().__init__(message)
        self.t_failed = t_failed
        self.diagnostics = diagnostics or {}


class RootNotFoundError(PhotonSourceError, RuntimeError):
    """A bracketing root search found no sign change."""

    def __init__(self, message, *, bracket=None, samples=None):
        super().__init__(message)
        self.bracket = bracket
        self.samples = samples
