"""Dual-species atom array rearrangement on arbitrary trap graphs."""

from .lattice import Bitmap, Pattern, TrapGraph, apply_target_pattern, build_kagome, build_square
from .pathing import Move, MoveSequence
from .solver import SolverConfig, Variant, solve
from .species import EMPTY, Species
from .state import ArrayState, classify_patterns, ideal_move_count
from .validator import Verdict, validate

__version__ = "0.1.0"

__all__ = [
    "ArrayState",
    "Bitmap",
    "EMPTY",
    "Move",
    "MoveSequence",
    "Pattern",
    "SolverConfig",
    "Species",
    "TrapGraph",
    "Variant",
    "Verdict",
    "apply_target_pattern",
    "build_kagome",
    "build_square",
    "classify_patterns",
    "ideal_move_count",
    "solve",
    "validate",
]
