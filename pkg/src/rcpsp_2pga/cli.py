"""Command line: ``rcpsp-2pga solve|bench|validate``.

Exit status: 0 success, 1 infeasible schedule (``validate``), 2 bad input,
3 internal solver error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .evolution import GaParams, SolverBug, run_2pga
from .harness import BenchConfig, load_bench_config, run_bench
from .psplib_io import PSPLIBParseError, expand_paths, load_instance, serialize_result
from .scheduling import InstanceError, Schedule, validate_schedule

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2
EXIT_SOLVER_BUG = 3

# flag name -> GaParams field
GA_FLAGS = {
    "seed": "seed",
    "budget": "schedule_budget",
    "population": "population_size",
    "parents": "parent_count",
    "elite": "elite_size",
    "phase1_gens": "phase1_generations",
    "phase2_gens": "phase2_generations",
    "tournament": "tournament_size",
}


class InputError(Exception):
    pass


def _add_ga_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("genetic algorithm")
    g.add_argument("--seed", type=int, help="random seed (default 0)")
    g.add_argument("--budget", type=int, help="maximum number of schedule decodes (default 5000)")
    g.add_argument("--population", type=int, help="population size (default 100)")
    g.add_argument("--parents", type=int, help="parents per generation (default 40)")
    g.add_argument("--elite", type=int, help="elite set size for both phases (default 5)")
    g.add_argument("--phase1-gens", type=int, help="generations per phase 1 (default 5)")
    g.add_argument("--phase2-gens", type=int, help="generations per phase 2 (default 5)")
    g.add_argument("--tournament", type=int, help="tournament size (default 3)")


def _ga_params(args: argparse.Namespace, base: GaParams | None = None) -> GaParams:
    overrides = {}
    for flag, name in GA_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            overrides[name] = value
    if "elite_size" in overrides:
        overrides["elite_size_phase2"] = overrides["elite_size"]
    return replace(base or GaParams(), **overrides)


def _load(path: str):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{path}: file not found")
    try:
        return load_instance(p)
    except (PSPLIBParseError, InstanceError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_solve(args: argparse.Namespace) -> int:
    instance = _load(args.instance)
    params = _ga_params(args)
    try:
        result = run_2pga(instance, params, instance_id=Path(args.instance).stem)
    except SolverBug as exc:
        print(f"solver bug: {exc}", file=sys.stderr)
        return EXIT_SOLVER_BUG
    text = serialize_result(result)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def _read_schedule(path: str, n_activities: int) -> Schedule:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{path}: file not found")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    if "schedule" in data:
        data = data["schedule"]
    if "activities" in data:
        starts: dict[int, int] = {}
        finishes: dict[int, int] = {}
        for rec in data["activities"]:
            j = int(rec["id"])
            if not 0 <= j < n_activities:
                raise InputError(f"structural error: unknown activity id {j}")
            if j in starts:
                raise InputError(f"structural error: activity {j} listed twice")
            starts[j], finishes[j] = int(rec["start"]), int(rec["finish"])
        missing = sorted(set(range(n_activities)) - set(starts))
        if missing:
            raise InputError(f"structural error: no times for activities {missing[:10]}")
        return Schedule(
            tuple(starts[j] for j in range(n_activities)), tuple(finishes[j] for j in range(n_activities))
        )
    try:
        schedule = Schedule.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: expected 'starts' and 'finishes' arrays") from exc
    if len(schedule.starts) != n_activities or len(schedule.finishes) != n_activities:
        raise InputError(
            f"structural error: schedule lists {len(schedule.starts)} activities, instance has {n_activities}"
        )
    return schedule


def cmd_validate(args: argparse.Namespace) -> int:
    instance = _load(args.instance)
    schedule = _read_schedule(args.schedule, instance.n_activities)
    report = validate_schedule(instance, schedule)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    elif report.feasible:
        print("FEASIBLE")
    else:
        for line in report.violations():
            print(line)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_bench(args: argparse.Namespace) -> int:
    config = load_bench_config(args.config) if args.config else BenchConfig(instance_paths=[])
    if args.instances:
        config.instance_paths = list(args.instances)
    if args.best_known is not None:
        config.best_known_path = args.best_known
    if args.reps is not None:
        config.repetitions = args.reps
    if args.workers is not None:
        config.parallel_workers = args.workers
    if args.out is not None:
        config.output_path = args.out
    config.ga = _ga_params(args, config.ga)
    config.__post_init__()
    paths = expand_paths(config.instance_paths)
    if not paths:
        raise InputError("no instance files given")
    for p in paths:
        if not p.is_file():
            raise InputError(f"{p}: file not found")
    if config.best_known_path and not Path(config.best_known_path).is_file():
        raise InputError(f"{config.best_known_path}: file not found")
    try:
        rows, _ = run_bench(config, paths)
    except (PSPLIBParseError, InstanceError) as exc:
        raise InputError(str(exc)) from exc
    for row in rows:
        gap = "" if row.gap is None else f"{100 * row.gap:+.2f}%"
        flag = "  improved" if row.improved else ""
        known = "-" if row.best_known is None else row.best_known
        print(f"{row.instance:>12}  best-known {known:>5}  achieved {row.achieved:>5}  {gap}{flag}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcpsp-2pga", description="Two-phase genetic algorithm for the RCPSP")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one PSPLIB instance and print the result as JSON")
    p.add_argument("instance")
    p.add_argument("--out", help="also write the JSON result to this file")
    _add_ga_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a batch and write a gap report (CSV + JSON)")
    p.add_argument("instances", nargs="*", help=".sm files, directories or glob patterns")
    p.add_argument("--config", help="JSON config file; command-line flags take precedence")
    p.add_argument("--best-known", help="best-known makespan table")
    p.add_argument("--reps", type=int, help="runs per instance")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--out", help="report path without extension (default: report)")
    _add_ga_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="check a schedule against an instance")
    p.add_argument("instance")
    p.add_argument("schedule", help="JSON schedule or solve output")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
