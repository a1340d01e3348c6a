"""``hcoa`` command line: generate, solve, validate, bench, loss, trace.

Exit codes: 0 success, 1 heuristic failure (or a failed check), 2 usage or
input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .lattice import (
    Bitmap,
    InstanceFormatError,
    Pattern,
    apply_target_pattern,
    build_kagome,
    build_square,
    load_instance,
    save_instance,
    stamp_central_region,
)
from .pathing import load_moves, save_moves
from .simbench import (
    LoadModel,
    ValidationContradiction,
    loss_experiment,
    move_trace,
    random_load,
    rows_to_csv,
    rows_to_json,
    run_benchmark,
    trace_to_csv,
    trial_rng,
)
from .solver import InfeasibleInstanceError, SolverConfig, Variant, solve
from .validator import validate

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


PATTERN_CHOICES = [p.value for p in Pattern] + ["bitmap"]


def _pattern(name: str, bitmap_file: str | None):
    if name == "bitmap":
        if not bitmap_file:
            raise UsageError("--pattern bitmap needs --bitmap-file")
        try:
            return Bitmap.from_text(Path(bitmap_file).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read bitmap: {exc}") from None
    return Pattern(name)


def _fraction(pattern, given: float | None) -> float | None:
    """A bitmap without an explicit fraction is stamped at its own size; otherwise 0.36."""
    if given is None:
        return None if isinstance(pattern, Bitmap) else 0.36
    return given


def _load_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fill", type=float, default=0.5, help="loading ratio")
    p.add_argument("--species-ratio", type=float, default=0.5, help="fraction of species A")
    p.add_argument("--seed", type=int, default=0)


def _solver_args(p: argparse.ArgumentParser, default_variant: str = "hcoa") -> None:
    p.add_argument("--variant", choices=[v.value for v in Variant], default=default_variant)
    p.add_argument("--loops", type=int, default=3, help="complementary loops (hcoa+ only)")
    p.add_argument("--sort-atom-partition", action="store_true")
    p.add_argument("--max-moves", type=_positive_int, default=None)


def _config(args) -> SolverConfig:
    return SolverConfig(
        variant=Variant(args.variant),
        complementary_loops=args.loops,
        sort_by_atom_partition=args.sort_atom_partition,
        max_moves=args.max_moves,
    )


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_generate(args) -> int:
    pattern = _pattern(args.pattern, args.bitmap_file)
    if args.lattice == "square":
        g = build_square(args.width, args.height, args.diagonal)
        g = apply_target_pattern(g, pattern, _fraction(pattern, args.target_fraction))
    else:
        if isinstance(pattern, Bitmap):
            raise UsageError("bitmap targets need a square lattice")
        if args.diagonal:
            raise UsageError("--diagonal applies to square lattices only")
        g = stamp_central_region(build_kagome(args.width, args.height), pattern, _fraction(pattern, args.target_fraction))
    model = LoadModel(args.fill, args.species_ratio, args.seed)
    s = random_load(g, model, trial_rng(args.seed, 0))
    save_instance(g, s, args.output)
    return OK


def cmd_solve(args) -> int:
    g, s = load_instance(args.instance)
    try:
        report = solve(g, s, _config(args))
    except InfeasibleInstanceError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return FAILED
    save_moves(report.moves, args.moves_out)
    data = report.to_dict()
    data["config"] = _config(args).to_dict()
    Path(args.report_out).write_text(json.dumps(data, indent=2) + "\n")
    print(f"success={report.success} moves={len(report.moves)} ideal={report.ideal_moves}")
    return OK if report.success else FAILED


def cmd_validate(args) -> int:
    g, s = load_instance(args.instance)
    seq = load_moves(args.moves)
    verdict = validate(g, s, seq)
    print(json.dumps(verdict.to_dict(), indent=2))
    return OK if verdict.legal and verdict.achieves_target else FAILED


def cmd_bench(args) -> int:
    patterns = [_pattern(p, args.bitmap_file) for p in args.pattern]
    model = LoadModel(args.fill, args.species_ratio, args.seed)
    try:
        rows = []
        for pattern in patterns:
            fraction = _fraction(pattern, args.target_fraction)
            rows += run_benchmark([pattern], args.sizes, model, _config(args), args.trials, fraction, args.workers)
    except ValidationContradiction as exc:
        print(f"validator contradiction: {exc}", file=sys.stderr)
        return FAILED
    render = rows_to_json if args.format == "json" else rows_to_csv
    _emit(render(rows, include_runtime=not args.no_runtime), args.output)
    return OK


def cmd_loss(args) -> int:
    pattern = _pattern(args.pattern, args.bitmap_file)
    model = LoadModel(args.fill, args.species_ratio, args.seed)
    cfg = SolverConfig(
        variant=Variant.HCOA_PLUS,
        complementary_loops=args.loops,
        sort_by_atom_partition=args.sort_atom_partition,
    )
    g = build_square(args.width, args.height)
    first, second = loss_experiment(g, pattern, model, cfg, args.p_loss, args.trials, args.target_fraction)
    print(json.dumps({"first_success_rate": first, "second_success_rate": second, "p_loss": args.p_loss}))
    return OK


def cmd_trace(args) -> int:
    g, s = load_instance(args.instance)
    if args.moves:
        seq = load_moves(args.moves)
    else:
        try:
            seq = solve(g, s, _config(args)).moves
        except InfeasibleInstanceError as exc:
            print(f"infeasible: {exc}", file=sys.stderr)
            return FAILED
    verdict = validate(g, s, seq)
    if not verdict.legal:
        idx, reason = verdict.first_violation
        raise UsageError(f"move {idx} is illegal ({reason})")
    _emit(trace_to_csv(move_trace(g, s, seq)), args.output)
    return OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcoa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random instance")
    p.add_argument("--lattice", choices=["square", "kagome"], default="square")
    p.add_argument("--width", type=_positive_int, default=10, help="columns, or kagome cells along x")
    p.add_argument("--height", type=_positive_int, default=10, help="rows, or kagome cells along y")
    p.add_argument("--diagonal", action="store_true", help="add diagonal bonds (square only)")
    p.add_argument("--pattern", choices=PATTERN_CHOICES, default="zebra")
    p.add_argument("--bitmap-file")
    p.add_argument("--target-fraction", type=float, default=None, help="default 0.36; a bitmap sets its own size")
    _load_model_args(p)
    p.add_argument("-o", "--output", default="instance.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="plan moves for an instance")
    p.add_argument("--instance", required=True)
    _solver_args(p)
    p.add_argument("--seed", type=int, default=0, help="recorded only; the solver is deterministic")
    p.add_argument("--moves-out", default="moves.json")
    p.add_argument("--report-out", default="report.json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="replay a move file against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--moves", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="success-rate and move statistics over random loads")
    p.add_argument("--pattern", choices=PATTERN_CHOICES, action="append")
    p.add_argument("--bitmap-file")
    p.add_argument("--sizes", type=_int_list, default=[10], help="comma-separated grid side lengths")
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--target-fraction", type=float, default=None)
    _load_model_args(p)
    _solver_args(p)
    p.add_argument("--workers", type=_positive_int, default=None, help="default: HCOA_THREADS or CPU count")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--no-runtime", action="store_true", help="blank median_runtime for reproducible output")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("loss", help="solve, apply atom loss, solve again (hcoa+)")
    p.add_argument("--p-loss", type=float, default=0.02)
    p.add_argument("--width", type=_positive_int, default=10)
    p.add_argument("--height", type=_positive_int, default=10)
    p.add_argument("--pattern", choices=PATTERN_CHOICES, default="zebra")
    p.add_argument("--bitmap-file")
    p.add_argument("--target-fraction", type=float, default=0.36)
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--loops", type=int, default=3)
    p.add_argument("--sort-atom-partition", action="store_true")
    _load_model_args(p)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("trace", help="per-move branch factor and empty-component count as CSV")
    p.add_argument("--instance", required=True)
    p.add_argument("--moves", help="replay this file instead of solving")
    _solver_args(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if args.command == "bench":
        args.pattern = args.pattern or ["zebra"]
    try:
        return args.func(args)
    except (UsageError, InstanceFormatError, OSError, ValueError) as exc:
        print(f"hcoa {args.command}: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
