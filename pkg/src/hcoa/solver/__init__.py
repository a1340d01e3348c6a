"""Heuristic connectivity-optimisation solver and its repair extension."""

from .board import MoveBudgetExceeded
from .core import (
    InfeasibleInstanceError,
    SolveReport,
    SolverConfig,
    StepRecord,
    Variant,
    complementary_step,
    default_max_moves,
    first_layer_obstacles,
    solve,
    step1,
    step2,
    step3,
    step4,
    target_depths,
)
from .steps import Obstacle

__all__ = [
    "InfeasibleInstanceError",
    "MoveBudgetExceeded",
    "Obstacle",
    "SolveReport",
    "SolverConfig",
    "StepRecord",
    "Variant",
    "complementary_step",
    "default_max_moves",
    "first_layer_obstacles",
    "solve",
    "step1",
    "step2",
    "step3",
    "step4",
    "target_depths",
]
