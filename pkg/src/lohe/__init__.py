"""Aggregation dynamics of rectangular complex matrices: models, integrators and checks."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    DivergenceError,
    LoheError,
    ValidationError,
)
from .model import CouplingParams, EnsembleState, FreeFlowSpec
from .sim import IntegratorConfig, Trajectory, integrate, rk4_step

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "CouplingParams",
    "DimensionError",
    "DivergenceError",
    "EnsembleState",
    "FreeFlowSpec",
    "IntegratorConfig",
    "LoheError",
    "Trajectory",
    "ValidationError",
    "integrate",
    "rk4_step",
]
