"""Batch benchmarking against PSPLIB best-known makespans."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .evolution import GaParams, RunResult, run_2pga
from .operators import MutationRates
from .psplib_io import InstanceId, load_best_known, load_instance, result_to_dict
from .scheduling import ProjectInstance, validate_schedule

log = logging.getLogger(__name__)

REPORT_COLUMNS = (
    "instance",
    "flat_index",
    "best_known",
    "achieved",
    "gap",
    "improved",
    "repetitions",
    "schedules_evaluated",
    "wall_time_s",
)


@dataclass
class BenchConfig:
    instance_paths: list[str]
    best_known_path: str | None = None
    ga: GaParams = field(default_factory=GaParams)
    repetitions: int = 1
    parallel_workers: int = 1
    output_path: str = "report"

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.parallel_workers < 1:
            raise ValueError("parallel_workers must be at least 1")


def ga_params_from_dict(data: dict, base: GaParams | None = None) -> GaParams:
    """Override ``base`` with the GaParams fields present in ``data``."""
    base = base or GaParams()
    known = {f.name for f in fields(GaParams)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown GA parameters: {sorted(unknown)}")
    values = dict(data)
    if "mutation_rates" in values and isinstance(values["mutation_rates"], dict):
        values["mutation_rates"] = MutationRates(**values["mutation_rates"])
    return replace(base, **values)


def load_bench_config(path: str | Path) -> BenchConfig:
    """Read a JSON config with keys ``instances``, ``best_known``, ``repetitions``,
    ``workers``, ``out`` and a ``ga`` object of GaParams fields."""
    data = json.loads(Path(path).read_text())
    allowed = {"instances", "best_known", "repetitions", "workers", "out", "ga"}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    instances = data.get("instances", [])
    if isinstance(instances, str):
        instances = [instances]
    return BenchConfig(
        instance_paths=list(instances),
        best_known_path=data.get("best_known"),
        ga=ga_params_from_dict(data.get("ga", {})),
        repetitions=int(data.get("repetitions", 1)),
        parallel_workers=int(data.get("workers", 1)),
        output_path=data.get("out", "report"),
    )


def derive_seed(base_seed: int, repetition: int, instance_id: str) -> int:
    """Seed of one run: first 8 bytes of SHA-256 over ``"<seed>:<repetition>:<instance>"``.

    Depends on nothing else, so serial and parallel batches agree.
    """
    digest = hashlib.sha256(f"{base_seed}:{repetition}:{instance_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class RunRecord:
    instance_id: str
    repetition: int
    seed: int
    makespan: int
    schedules_evaluated: int
    wall_time_s: float
    feasible: bool
    result: dict


@dataclass
class GapRow:
    instance: str
    flat_index: int | None
    best_known: int | None
    achieved: int
    gap: float | None
    improved: bool
    repetitions: int
    schedules_evaluated: int
    wall_time_s: float


def compute_gap(achieved: int, best_known: int | None) -> float | None:
    if best_known is None:
        return None
    return (achieved - best_known) / best_known


def _run_one(task: tuple[ProjectInstance, str, int, GaParams]) -> RunRecord:
    instance, instance_id, repetition, params = task
    started = time.perf_counter()
    result: RunResult = run_2pga(instance, params, instance_id=instance_id)
    elapsed = time.perf_counter() - started
    feasible = validate_schedule(instance, result.best_schedule).feasible
    return RunRecord(
        instance_id=instance_id,
        repetition=repetition,
        seed=params.seed,
        makespan=result.makespan,
        schedules_evaluated=result.schedules_evaluated,
        wall_time_s=elapsed,
        feasible=feasible,
        result=result_to_dict(result),
    )


def load_batch(paths: list[Path]) -> list[tuple[str, ProjectInstance]]:
    """Parse every file up front; any failure aborts the whole batch."""
    batch = []
    for path in paths:
        instance = load_instance(path)
        batch.append((path.stem, instance))
    ids = [name for name, _ in batch]
    if len(set(ids)) != len(ids):
        raise ValueError("instance file names must be unique within a batch")
    return batch


def run_batch(
    batch: list[tuple[str, ProjectInstance]],
    params: GaParams,
    repetitions: int,
    workers: int = 1,
) -> list[RunRecord]:
    tasks = [
        (instance, name, rep, replace(params, seed=derive_seed(params.seed, rep, name)))
        for name, instance in batch
        for rep in range(repetitions)
    ]
    if workers == 1:
        records = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, tasks))
    for rec in records:
        log.info("%s rep %d: makespan %d (%.1fs)", rec.instance_id, rec.repetition, rec.makespan, rec.wall_time_s)
    return records


def gap_report(records: list[RunRecord], best_known: dict[int, int] | None = None) -> list[GapRow]:
    """Aggregate runs per instance: the best makespan over repetitions, joined with best-known values."""
    by_instance: dict[str, list[RunRecord]] = {}
    for rec in records:
        by_instance.setdefault(rec.instance_id, []).append(rec)
    rows = []
    for name, recs in by_instance.items():
        ident = InstanceId.from_name(name)
        flat = ident.flat if ident else None
        known = best_known.get(flat) if best_known is not None and flat is not None else None
        achieved = min(r.makespan for r in recs)
        gap = compute_gap(achieved, known)
        rows.append(
            GapRow(
                instance=name,
                flat_index=flat,
                best_known=known,
                achieved=achieved,
                gap=gap,
                improved=gap is not None and gap < 0,
                repetitions=len(recs),
                schedules_evaluated=sum(r.schedules_evaluated for r in recs),
                wall_time_s=round(sum(r.wall_time_s for r in recs), 3),
            )
        )
    return rows


def report_csv(rows: list[GapRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        values = asdict(row)
        writer.writerow("" if values[c] is None else values[c] for c in REPORT_COLUMNS)
    return buf.getvalue()


def report_json(rows: list[GapRow], records: list[RunRecord]) -> str:
    return json.dumps(
        {
            "rows": [asdict(r) for r in rows],
            "runs": [
                {k: v for k, v in asdict(rec).items() if k != "result"} | {"activity_list": rec.result["activity_list"]}
                for rec in records
            ],
        },
        indent=2,
        sort_keys=True,
    )


def read_report_csv(text: str) -> list[dict]:
    """Rows of a CSV report with numeric fields converted back."""
    out = []
    for raw in csv.DictReader(io.StringIO(text)):
        row: dict = {}
        for key, value in raw.items():
            if value == "":
                row[key] = None
            elif key in ("flat_index", "best_known", "achieved", "repetitions", "schedules_evaluated"):
                row[key] = int(value)
            elif key in ("gap", "wall_time_s"):
                row[key] = float(value)
            elif key == "improved":
                row[key] = value == "True"
            else:
                row[key] = value
        out.append(row)
    return out


def output_paths(output: str | Path) -> tuple[Path, Path]:
    base = Path(output)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    return base.with_suffix(".csv"), base.with_suffix(".json")


def run_bench(config: BenchConfig, paths: list[Path]) -> tuple[list[GapRow], list[RunRecord]]:
    """Run the whole benchmark and write ``<out>.csv`` and ``<out>.json``."""
    batch = load_batch(paths)
    best_known = load_best_known(config.best_known_path) if config.best_known_path else None
    records = run_batch(batch, config.ga, config.repetitions, config.parallel_workers)
    rows = gap_report(records, best_known)
    csv_path, json_path = output_paths(config.output_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(report_csv(rows))
    json_path.write_text(report_json(rows, records))
    return rows, records
