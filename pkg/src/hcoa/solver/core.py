from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from enum import Enum

from ..lattice import TrapGraph
from ..pathing import Move, MoveSequence
from ..state import ArrayState, PatternCounts, classify_patterns, feasible, ideal_move_count
from . import steps
from .board import Board, MoveBudgetExceeded
from .complementary import connect_defects


class InfeasibleInstanceError(ValueError):
    """Not enough atoms of some species to fill its target sites."""


class Variant(Enum):
    HCOA = "hcoa"
    HCOA_PLUS = "hcoa+"


@dataclass(frozen=True)
class SolverConfig:
    variant: Variant = Variant.HCOA
    complementary_loops: int = 3
    sort_by_atom_partition: bool = False
    max_moves: int | None = None
    """``None`` means 20 x ideal move count + 50, fixed when the solve starts."""

    def __post_init__(self) -> None:
        if isinstance(self.variant, str):
            object.__setattr__(self, "variant", Variant(self.variant))
        if self.complementary_loops < 0:
            raise ValueError("complementary_loops must be >= 0")
        if self.max_moves is not None and self.max_moves <= 0:
            raise ValueError("max_moves must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d


@dataclass
class StepRecord:
    name: str
    executed: bool
    moves: int
    seconds: float


@dataclass
class SolveReport:
    success: bool
    moves: MoveSequence
    steps: list[StepRecord]
    final_counts: PatternCounts
    ideal_moves: int
    runtime: float
    aborted: bool = False
    final_state: list[int] = field(default_factory=list, repr=False)

    def executed(self, name: str) -> bool:
        return any(r.executed for r in self.steps if r.name == name)

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "aborted": self.aborted,
            "move_count": len(self.moves),
            "total_hops": self.moves.total_hops,
            "ideal_moves": self.ideal_moves,
            "runtime_seconds": self.runtime,
            "final_counts": list(self.final_counts.as_tuple()),
            "steps": [asdict(r) for r in self.steps],
        }


class _Recorder:
    def __init__(self, board: Board):
        self.board = board
        self.records: list[StepRecord] = []

    def run(self, name: str, executed: bool, fn, *args):
        before = len(self.board.moves)
        t0 = time.perf_counter()
        try:
            return fn(*args)
        finally:
            self.records.append(
                StepRecord(name, executed, len(self.board.moves) - before, time.perf_counter() - t0)
            )


def _four_steps(rec: _Recorder, b: Board, cfg: SolverConfig) -> None:
    sort = cfg.sort_by_atom_partition
    unresolved = rec.run("step1", bool(b.misplaced()), steps.run_step1, b, sort)
    needs2 = bool(unresolved) or bool(b.enclosed_components())
    rec.run("step2", needs2, steps.run_step2, b, unresolved, sort)
    rec.run("step3", bool(b.empty_targets()), steps.run_step3, b)
    rec.run("step4", bool(b.empty_targets()), steps.run_step4, b)


def _rerun(b: Board, cfg: SolverConfig) -> None:
    sort = cfg.sort_by_atom_partition
    steps.run_step2(b, steps.run_step1(b, sort), sort)
    steps.run_step3(b)
    steps.run_step4(b)


def _complementary(rec: _Recorder, b: Board, cfg: SolverConfig, loops: int) -> None:
    budget = 4 * len(b.g.target_sites) + 16
    for _ in range(loops):
        if b.solved():
            break
        rec.run("complementary", True, connect_defects, b, budget, lambda: _rerun(b, cfg))
        _four_steps(rec, b, cfg)


def default_max_moves(g: TrapGraph, s: ArrayState) -> int:
    return 20 * ideal_move_count(classify_patterns(g, s)) + 50


def solve(g: TrapGraph, s: ArrayState, cfg: SolverConfig | None = None) -> SolveReport:
    """Plan a move sequence from ``s`` to the target labelling of ``g``.

    Raises :class:`InfeasibleInstanceError` when some species is short of atoms;
    heuristic failure is reported through ``SolveReport.success``.
    """
    cfg = cfg or SolverConfig()
    if not feasible(g, s):
        raise InfeasibleInstanceError("fewer atoms than target sites for some species")
    cap = cfg.max_moves if cfg.max_moves is not None else default_max_moves(g, s)
    ideal = ideal_move_count(classify_patterns(g, s))
    b = Board(g, list(s.occupancy), cap)
    rec = _Recorder(b)
    aborted = False
    t0 = time.perf_counter()
    try:
        _four_steps(rec, b, cfg)
        if cfg.variant is Variant.HCOA_PLUS:
            _complementary(rec, b, cfg, cfg.complementary_loops)
    except MoveBudgetExceeded:
        aborted = True
    runtime = time.perf_counter() - t0
    counts = classify_patterns(g, b.occ)
    return SolveReport(
        success=not aborted and counts.solved,
        moves=MoveSequence(list(b.moves)),
        steps=rec.records,
        final_counts=counts,
        ideal_moves=ideal,
        runtime=runtime,
        aborted=aborted,
        final_state=list(b.occ),
    )


# -- single-step entry points ------------------------------------------------


def _board(g: TrapGraph, s: ArrayState) -> Board:
    return Board(g, list(s.occupancy))


def _out(b: Board) -> tuple[ArrayState, list[Move]]:
    return ArrayState(b.occ), list(b.moves)


def step1(g: TrapGraph, s: ArrayState, sort_by_atom_partition: bool = False):
    """Returns ``(state, moves, unresolved misplaced sites)``."""
    b = _board(g, s)
    left = steps.run_step1(b, sort_by_atom_partition)
    return (*_out(b), left)


def first_layer_obstacles(g: TrapGraph, s: ArrayState, unresolved: list[int]) -> list[steps.Obstacle]:
    return steps.first_layer_obstacles(_board(g, s), list(unresolved))


def step2(g: TrapGraph, s: ArrayState, sort_by_atom_partition: bool = False):
    """Runs step 1 first to find the misplaced atoms it cannot place; returns ``(state, moves)``."""
    b = _board(g, s)
    left = steps.run_step1(b, sort_by_atom_partition)
    steps.run_step2(b, left, sort_by_atom_partition)
    return _out(b)


def target_depths(g: TrapGraph, s: ArrayState) -> dict[int, int | None]:
    return steps.target_depths(_board(g, s))


def step3(g: TrapGraph, s: ArrayState):
    """Returns ``(state, moves, unfilled target sites)``."""
    b = _board(g, s)
    left = steps.run_step3(b)
    return (*_out(b), left)


def step4(g: TrapGraph, s: ArrayState):
    """Returns ``(state, moves, still unfilled target sites)``."""
    b = _board(g, s)
    left = steps.run_step4(b)
    return (*_out(b), left)


def complementary_step(g: TrapGraph, s: ArrayState, loops: int = 3, cfg: SolverConfig | None = None):
    """Connect-and-retry cycles on ``s``; returns ``(state, moves)``."""
    cfg = cfg or SolverConfig()
    b = _board(g, s)
    _complementary(_Recorder(b), b, cfg, loops)
    return _out(b)
