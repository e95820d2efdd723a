"""Exception hierarchy shared by all riser modules."""


class RiserError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(RiserError, ValueError):
    """Scenario configuration failed validation."""


class RigidityViolated(ConfigError):
    """k <= 4 * max|a| * h**2, so the rigidity margin k0 is not positive."""


class SigmaTooSmall(ConfigError):
    """sigma does not exceed 8 h / sqrt(max|a|)."""


class NegativePhi(RiserError, ValueError):
    """The top-end displacement evaluated to a negative value."""


class NonFinite(RiserError, FloatingPointError):
    """An operator produced NaN or infinity."""


class Diverged(RiserError):
    """The time integrator produced a non-finite state."""

    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} (t={t:.6g})")
        self.t = t


class PicardStalled(Diverged):
    """Fixed-point iteration for the drag term did not reach tolerance."""


class WindowTooSmall(RiserError, ValueError):
    """Too few records in the tail window to fit a decay exponent."""


class EnergyUnderflow(RiserError):
    """Energy fell below the measurement floor inside the fit window."""
