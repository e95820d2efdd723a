"""Numerical laboratory for a damped, boundary-driven riser equation."""

from .errors import (
    ConfigError,
    Diverged,
    EnergyUnderflow,
    NegativePhi,
    NonFinite,
    PicardStalled,
    RigidityViolated,
    RiserError,
    SigmaTooSmall,
    WindowTooSmall,
)
from .model import (
    AnalysisConstants,
    FieldState,
    GrowthSpec,
    Grid1D,
    Parameters,
    TensionProfile,
    TimeFunction,
    derive_constants,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConstants",
    "ConfigError",
    "Diverged",
    "EnergyUnderflow",
    "FieldState",
    "GrowthSpec",
    "Grid1D",
    "NegativePhi",
    "NonFinite",
    "Parameters",
    "PicardStalled",
    "RigidityViolated",
    "RiserError",
    "SigmaTooSmall",
    "TensionProfile",
    "TimeFunction",
    "WindowTooSmall",
    "derive_constants",
]
