"""Stochastic loading, atom loss and the benchmark harness.

Every trial draws its instance from its own generator, seeded by
``SeedSequence(master_seed, spawn_key=(trial,))``. A trial can therefore be
replayed on its own, and results do not depend on how trials are spread
over worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .connectivity import label_empty
from .lattice import Pattern, PatternKind, TrapGraph, apply_target_pattern, build_square
from .pathing import MoveSequence, apply_move, branch_factor
from .solver import InfeasibleInstanceError, SolverConfig, Variant, solve
from .species import EMPTY, Species
from .state import ArrayState, feasible
from .validator import validate


@dataclass(frozen=True)
class LoadModel:
    fill_ratio: float = 0.5
    species_ratio: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        # 0 is admitted so that an all-empty load can be drawn.
        if not 0 <= self.fill_ratio <= 1:
            raise ValueError("fill_ratio must lie in [0, 1]")
        if not 0 <= self.species_ratio <= 1:
            raise ValueError("species_ratio must lie in [0, 1]")


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_load(g: TrapGraph, model: LoadModel, rng: np.random.Generator | None = None) -> ArrayState:
    """Occupy each site with probability ``fill_ratio``; each atom is A with probability ``species_ratio``."""
    rng = rng if rng is not None else _rng(model.seed)
    filled = rng.random(g.n) < model.fill_ratio
    is_a = rng.random(g.n) < model.species_ratio
    occ = np.where(filled, np.where(is_a, int(Species.A), int(Species.B)), EMPTY)
    return ArrayState(occ.tolist())


def apply_atom_loss(s: ArrayState, p_loss: float, seed=0) -> ArrayState:
    if not 0 <= p_loss <= 1:
        raise ValueError("p_loss must lie in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else _rng(seed)
    lost = rng.random(len(s)) < p_loss
    return ArrayState([EMPTY if gone else v for v, gone in zip(s.occupancy, lost)])


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(trial,))))


class ValidationContradiction(RuntimeError):
    """The solver's success flag and the independent replay disagree."""


def _checked(g: TrapGraph, s: ArrayState, cfg: SolverConfig, where: str):
    report = solve(g, s, cfg)
    verdict = validate(g, s, report.moves)
    if not verdict.legal or verdict.achieves_target != report.success:
        raise ValidationContradiction(
            f"{where}: solver success={report.success}, validator legal={verdict.legal} "
            f"achieves_target={verdict.achieves_target} violation={verdict.first_violation}"
        )
    return report, verdict


# -- benchmark ---------------------------------------------------------------

CSV_FIELDS = (
    "pattern",
    "n",
    "N_T",
    "trials",
    "success_rate",
    "mean_moves",
    "mean_ideal",
    "extra_ratio",
    "mean_total_hops",
    "mean_euclidean_length",
    "mean_length_per_move",
    "median_runtime",
    "step2_exec_prob",
    "step4_exec_prob",
)


@dataclass(frozen=True)
class BenchRow:
    """Aggregate over the feasible trials of one (pattern, size) cell.

    Move and length means run over successful trials; ``extra_ratio`` is the
    mean of ``M / M_m - 1`` over successful trials that needed any move.
    ``infeasible`` counts excluded trials and is not a CSV column.
    """

    pattern: str
    n: int
    N_T: int
    trials: int
    success_rate: float
    mean_moves: float
    mean_ideal: float
    extra_ratio: float
    mean_total_hops: float
    mean_euclidean_length: float
    mean_length_per_move: float
    median_runtime: float
    step2_exec_prob: float
    step4_exec_prob: float
    infeasible: int = 0


@dataclass(frozen=True)
class TrialResult:
    trial: int
    feasible: bool
    success: bool = False
    moves: int = 0
    ideal: int = 0
    hops: int = 0
    length: float = 0.0
    runtime: float = 0.0
    step2: bool = False
    step4: bool = False


def pattern_name(pattern: PatternKind) -> str:
    return pattern.value if isinstance(pattern, Pattern) else "bitmap"


@lru_cache(maxsize=32)
def _square_instance_graph(side: int, pattern: PatternKind, target_fraction: float | None) -> TrapGraph:
    return apply_target_pattern(build_square(side, side), pattern, target_fraction)


def run_trial(g: TrapGraph, model: LoadModel, cfg: SolverConfig, trial: int) -> TrialResult:
    """Load, solve and validate trial ``trial``; raises :class:`ValidationContradiction`."""
    s = random_load(g, model, trial_rng(model.seed, trial))
    if not feasible(g, s):
        return TrialResult(trial, False)
    report, verdict = _checked(g, s, cfg, f"trial {trial}")
    return TrialResult(
        trial,
        True,
        success=report.success,
        moves=verdict.move_count,
        ideal=report.ideal_moves,
        hops=verdict.total_hops,
        length=verdict.total_euclidean_length,
        runtime=report.runtime,
        step2=report.executed("step2"),
        step4=report.executed("step4"),
    )


def _trial_job(args) -> TrialResult:
    side, pattern, fraction, model, cfg, trial = args
    return run_trial(_square_instance_graph(side, pattern, fraction), model, cfg, trial)


def worker_count() -> int:
    """``HCOA_THREADS`` if set, else the machine's CPU count."""
    raw = os.environ.get("HCOA_THREADS")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"HCOA_THREADS must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ValueError(f"HCOA_THREADS must be a positive integer, got {raw!r}")
        return value
    return os.cpu_count() or 1


def _map(jobs: list, workers: int | None) -> list[TrialResult]:
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) < 2:
        return [_trial_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs) if xs else math.nan


def aggregate(pattern: str, g: TrapGraph, results: Iterable[TrialResult]) -> BenchRow:
    results = list(results)
    done = [r for r in results if r.feasible]
    ok = [r for r in done if r.success]
    extra = [r.moves / r.ideal - 1 for r in ok if r.ideal > 0]
    per_move = [r.length / r.moves for r in ok if r.moves > 0]
    return BenchRow(
        pattern=pattern,
        n=g.n,
        N_T=len(g.target_sites),
        trials=len(done),
        success_rate=len(ok) / len(done) if done else math.nan,
        mean_moves=_mean([r.moves for r in ok]),
        mean_ideal=_mean([r.ideal for r in ok]),
        extra_ratio=_mean(extra),
        mean_total_hops=_mean([r.hops for r in ok]),
        mean_euclidean_length=_mean([r.length for r in ok]),
        mean_length_per_move=_mean(per_move),
        median_runtime=statistics.median([r.runtime for r in done]) if done else math.nan,
        step2_exec_prob=_mean([float(r.step2) for r in done]),
        step4_exec_prob=_mean([float(r.step4) for r in done]),
        infeasible=len(results) - len(done),
    )


def run_trials(
    side: int,
    pattern: PatternKind,
    model: LoadModel,
    cfg: SolverConfig,
    trials: int,
    target_fraction: float | None = 0.36,
    workers: int | None = None,
) -> list[TrialResult]:
    """Per-trial results on a ``side`` x ``side`` square grid, in trial order."""
    if side < 1 or trials < 0:
        raise ValueError("side must be positive and trials non-negative")
    jobs = [(side, pattern, target_fraction, model, cfg, t) for t in range(trials)]
    return _map(jobs, workers)


def run_benchmark(
    patterns: Iterable[PatternKind],
    sizes: Iterable[int],
    model: LoadModel = LoadModel(),
    cfg: SolverConfig = SolverConfig(),
    trials: int = 1000,
    target_fraction: float | None = 0.36,
    workers: int | None = None,
) -> list[BenchRow]:
    """One row per (pattern, side) on square ``side`` x ``side`` grids.

    Every trial is replayed by the validator; a disagreement with the
    solver raises :class:`ValidationContradiction`.
    """
    rows = []
    for pattern in patterns:
        for side in sizes:
            results = run_trials(side, pattern, model, cfg, trials, target_fraction, workers)
            g = _square_instance_graph(side, pattern, target_fraction)
            rows.append(aggregate(pattern_name(pattern), g, results))
    return rows


def _cell(v) -> str:
    return "" if isinstance(v, float) and math.isnan(v) else str(v)


def rows_to_csv(rows: Iterable[BenchRow], include_runtime: bool = True) -> str:
    """CSV text with a header row; ``include_runtime=False`` blanks the only nondeterministic column."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for row in rows:
        d = asdict(row)
        if not include_runtime:
            d["median_runtime"] = math.nan
        w.writerow([_cell(d[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def rows_to_json(rows: Iterable[BenchRow], include_runtime: bool = True) -> str:
    """One JSON object per line, same keys as the CSV columns; NaN becomes null."""
    out = []
    for row in rows:
        d = {k: getattr(row, k) for k in CSV_FIELDS}
        if not include_runtime:
            d["median_runtime"] = None
        d = {k: None if isinstance(v, float) and math.isnan(v) else v for k, v in d.items()}
        out.append(json.dumps(d))
    return "\n".join(out) + ("\n" if out else "")


# -- atom loss -----------------------------------------------------------------


class LossOutcome(NamedTuple):
    first_success_rate: float
    second_success_rate: float


def loss_experiment(
    g: TrapGraph,
    pattern: PatternKind | None,
    model: LoadModel,
    cfg: SolverConfig,
    p_loss: float,
    trials: int,
    target_fraction: float | None = 0.36,
) -> LossOutcome:
    """Solve, knock out atoms of the finished array, then solve again.

    ``pattern`` is stamped onto ``g`` (a grid) first; pass ``None`` if ``g``
    already carries its targets. Trials infeasible at load time are dropped
    from the first rate, trials left infeasible by the loss from the second.
    """
    if cfg.variant is not Variant.HCOA_PLUS:
        raise ValueError("loss_experiment is defined for the HCOA+ variant")
    if not 0 <= p_loss <= 1:
        raise ValueError("p_loss must lie in [0, 1]")
    if pattern is not None:
        g = apply_target_pattern(g, pattern, target_fraction)
    first = [0, 0]
    second = [0, 0]
    for trial in range(trials):
        rng = trial_rng(model.seed, trial)
        s = random_load(g, model, rng)
        if not feasible(g, s):
            continue
        report, _ = _checked(g, s, cfg, f"trial {trial}")
        first[1] += 1
        if not report.success:
            continue
        first[0] += 1
        after = apply_atom_loss(ArrayState(report.final_state), p_loss, rng)
        if not feasible(g, after):
            continue
        again, _ = _checked(g, after, cfg, f"trial {trial} after loss")
        second[1] += 1
        second[0] += again.success
    rate = lambda c: c[0] / c[1] if c[1] else math.nan  # noqa: E731
    return LossOutcome(rate(first), rate(second))


# -- runtime scaling -----------------------------------------------------------


class ScalingPoint(NamedTuple):
    n: int
    median_runtime: float


def runtime_profile(
    sizes: Iterable[int],
    model: LoadModel = LoadModel(),
    cfg: SolverConfig = SolverConfig(),
    trials: int = 5,
    pattern: PatternKind = Pattern.ZEBRA,
    target_fraction: float = 0.36,
) -> list[ScalingPoint]:
    """Median ``solve`` time per site count; each size must be a perfect square."""
    points = []
    for n in sizes:
        side = math.isqrt(n)
        if side * side != n:
            raise ValueError(f"size {n} is not a square site count")
        g = _square_instance_graph(side, pattern, target_fraction)
        times = []
        for trial in range(trials):
            s = random_load(g, model, trial_rng(model.seed, trial))
            if not feasible(g, s):
                continue
            times.append(solve(g, s, cfg).runtime)
        if not times:
            raise InfeasibleInstanceError(f"no feasible trial at n={n}")
        points.append(ScalingPoint(n, statistics.median(times)))
    return points


def fit_slope(points: Sequence[ScalingPoint], last: int = 6) -> float:
    """Least-squares slope of log(runtime) against log(n) over the ``last`` largest sizes."""
    pts = sorted(points)[-last:]
    if len({p.n for p in pts}) < 3:
        raise ValueError("a slope needs at least 3 distinct sizes")
    x = np.log([p.n for p in pts])
    y = np.log([p.median_runtime for p in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def runtime_scaling(
    sizes: Sequence[int],
    model: LoadModel = LoadModel(),
    cfg: SolverConfig = SolverConfig(),
    trials: int = 5,
    pattern: PatternKind = Pattern.ZEBRA,
) -> float:
    if len(set(sizes)) < 3:
        raise ValueError("runtime_scaling needs at least 3 distinct sizes")
    return fit_slope(runtime_profile(sizes, model, cfg, trials, pattern))


# -- traces --------------------------------------------------------------------


class TracePoint(NamedTuple):
    step: int
    branch_factor: int
    components: int


def move_trace(g: TrapGraph, s: ArrayState, moves: MoveSequence) -> list[TracePoint]:
    """Branch factor and empty-component count before the first move and after each move."""
    out = []
    state = s
    for k in range(len(moves) + 1):
        if k:
            state = apply_move(g, state, moves[k - 1])
        _, count = label_empty(g.neighbors, state.occupancy)
        out.append(TracePoint(k, branch_factor(g, state), count))
    return out


def trace_to_csv(points: Iterable[TracePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TracePoint._fields)
    w.writerows(points)
    return buf.getvalue()
