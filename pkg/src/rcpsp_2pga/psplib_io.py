"""Reading PSPLIB single-mode ``.sm`` files and best-known makespan tables."""

from __future__ import annotations

import json
import re
from collections.abc import Iterable
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .evolution import Individual, RunResult
from .scheduling import InfeasibleInstanceError, InstanceError, ProjectInstance, Schedule

PRECEDENCE = "PRECEDENCE RELATIONS"
REQUESTS = "REQUESTS/DURATIONS"
AVAILABILITIES = "RESOURCEAVAILABILITIES"

INSTANCES_PER_PARAMETER_SET = 10

_DATASETS = ("j30", "j60", "j90", "j120")


class PSPLIBParseError(ValueError):
    """Malformed PSPLIB text; carries the section and 1-based line number."""

    def __init__(self, message: str, section: str | None = None, line: int | None = None):
        where = []
        if section:
            where.append(f"section {section!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.section = section
        self.line = line


class DuplicateKeyError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class InstanceId:
    """PSPLIB instance identity, e.g. ``j1206_9`` is J120, parameter set 6, instance 9."""

    dataset: str
    parameter_set: int
    instance: int

    @property
    def flat(self) -> int:
        """Running number as used by the flat best-known tables (1-based)."""
        return (self.parameter_set - 1) * INSTANCES_PER_PARAMETER_SET + self.instance

    @property
    def name(self) -> str:
        return f"{self.dataset}{self.parameter_set}_{self.instance}"

    def __str__(self) -> str:
        return self.name

    @classmethod
    def from_name(cls, name: str) -> InstanceId | None:
        stem = Path(name).name.split(".")[0]
        for dataset in sorted(_DATASETS, key=len, reverse=True):
            if stem.lower().startswith(dataset):
                m = re.fullmatch(r"(\d+)_(\d+)", stem[len(dataset):])
                if m:
                    return cls(dataset, int(m.group(1)), int(m.group(2)))
        return None


def _header_int(lines: list[str], key: str) -> int | None:
    for line in lines:
        if line.lower().lstrip().startswith(key):
            m = re.search(r":\s*(\d+)", line)
            if m:
                return int(m.group(1))
    return None


def _find_section(lines: list[str], header: str) -> int:
    for idx, line in enumerate(lines):
        if line.strip().upper().startswith(header):
            return idx
    raise PSPLIBParseError("missing section header", section=header)


def _section_rows(lines: list[str], start: int, section: str) -> list[tuple[int, list[int]]]:
    """Numeric rows after the header line at ``start``, up to the next ``****`` rule."""
    rows = []
    for idx in range(start + 1, len(lines)):
        text = lines[idx].strip()
        if text.startswith("*"):
            break
        if not text or text.startswith("-") or not text[0].isdigit():
            continue
        try:
            rows.append((idx + 1, [int(tok) for tok in text.split()]))
        except ValueError:
            raise PSPLIBParseError(f"non-integer field in {text!r}", section=section, line=idx + 1) from None
    return rows


def parse_instance(text: str, name: str = "") -> ProjectInstance:
    """Parse the contents of a single-mode PSPLIB file.

    PSPLIB numbers jobs from 1 and lists successors; the returned instance
    numbers activities from 0 and stores predecessor sets.
    """
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    n_jobs = _header_int(lines, "jobs")
    if n_jobs is None:
        raise PSPLIBParseError("missing 'jobs (incl. supersource/sink)' header")
    if n_jobs < 2:
        raise InstanceError(f"declared {n_jobs} jobs; at least the two dummies are required")

    prec_at = _find_section(lines, PRECEDENCE)
    req_at = _find_section(lines, REQUESTS)
    avail_at = _find_section(lines, AVAILABILITIES)

    successors: dict[int, list[int]] = {}
    for lineno, row in _section_rows(lines, prec_at, PRECEDENCE):
        if len(row) < 3 or len(row) != 3 + row[2]:
            raise PSPLIBParseError(f"successor count does not match row {row}", section=PRECEDENCE, line=lineno)
        job = row[0] - 1
        if job in successors:
            raise InstanceError(f"job {row[0]} listed twice in {PRECEDENCE}")
        successors[job] = [s - 1 for s in row[3:]]
    if sorted(successors) != list(range(n_jobs)):
        raise InstanceError(f"{PRECEDENCE} lists {len(successors)} jobs, header declares {n_jobs}")

    avail_rows = _section_rows(lines, avail_at, AVAILABILITIES)
    if len(avail_rows) != 1:
        raise PSPLIBParseError("expected exactly one row of capacities", section=AVAILABILITIES, line=avail_at + 1)
    capacities = avail_rows[0][1]
    n_res = _header_int(lines, "- renewable")
    if n_res is not None and n_res != len(capacities):
        raise InstanceError(f"header declares {n_res} renewable resources, found {len(capacities)} capacities")

    durations = [0] * n_jobs
    requirements: list[tuple[int, ...]] = [()] * n_jobs
    seen = set()
    for lineno, row in _section_rows(lines, req_at, REQUESTS):
        if len(row) != 3 + len(capacities):
            raise PSPLIBParseError(f"expected {3 + len(capacities)} fields, got {len(row)}", section=REQUESTS, line=lineno)
        job = row[0] - 1
        if not 0 <= job < n_jobs or job in seen:
            raise InstanceError(f"unexpected job number {row[0]} in {REQUESTS} (line {lineno})")
        if row[1] != 1:
            raise PSPLIBParseError("only single-mode files are supported", section=REQUESTS, line=lineno)
        seen.add(job)
        durations[job] = row[2]
        requirements[job] = tuple(row[3:])
    if len(seen) != n_jobs:
        raise InstanceError(f"{REQUESTS} lists {len(seen)} jobs, header declares {n_jobs}")

    predecessors: list[set[int]] = [set() for _ in range(n_jobs)]
    for job, succs in successors.items():
        for s in succs:
            if not 0 <= s < n_jobs:
                raise InstanceError(f"job {job + 1} lists unknown successor {s + 1}")
            predecessors[s].add(job)

    for j, row in enumerate(requirements):
        for k, (r, cap) in enumerate(zip(row, capacities)):
            if r > cap:
                raise InfeasibleInstanceError(
                    f"job {j + 1} requires {r} of resource R{k + 1}, capacity is {cap}"
                )

    return ProjectInstance(
        durations=tuple(durations),
        predecessors=tuple(frozenset(p) for p in predecessors),
        capacities=tuple(capacities),
        requirements=tuple(requirements),
        name=name,
    )


def load_instance(path: str | Path) -> ProjectInstance:
    path = Path(path)
    return parse_instance(path.read_text(encoding="latin-1"), name=path.stem)


def render_instance(instance: ProjectInstance) -> str:
    """Write ``instance`` in the PSPLIB single-mode layout."""
    rule = "*" * 72
    n = instance.n_activities
    k = instance.n_resources
    out = [
        rule,
        f"jobs (incl. supersource/sink ):  {n}",
        f"horizon                       :  {instance.horizon}",
        "RESOURCES",
        f"  - renewable                 :  {k}   R",
        "  - nonrenewable              :  0   N",
        "  - doubly constrained        :  0   D",
        rule,
        "PRECEDENCE RELATIONS:",
        "jobnr.    #modes  #successors   successors",
    ]
    for j in range(n):
        succ = sorted(instance.successors[j])
        out.append(f"{j + 1:4d}        1  {len(succ):9d}   " + "".join(f"{s + 1:4d}" for s in succ))
    out += [
        rule,
        "REQUESTS/DURATIONS:",
        "jobnr. mode duration  " + "  ".join(f"R {r + 1}" for r in range(k)),
        "-" * 72,
    ]
    for j in range(n):
        reqs = "".join(f"{r:5d}" for r in instance.requirements[j])
        out.append(f"{j + 1:4d}      1 {instance.durations[j]:5d}  {reqs}")
    out += [
        rule,
        "RESOURCEAVAILABILITIES:",
        "  " + "  ".join(f"R {r + 1}" for r in range(k)),
        "  " + "".join(f"{c:5d}" for c in instance.capacities),
        rule,
    ]
    return "\n".join(out) + "\n"


def parse_best_known(text: str) -> dict[int, int]:
    """Best-known makespans keyed by flat instance number.

    Accepted row shapes, one entry per row:

    * ``<flat> <makespan>`` (two columns)
    * ``<parameter set> <instance> <makespan> [...]`` as in PSPLIB's
      ``*opt.sm``/``*hrs.sm`` files; trailing columns are ignored
    * ``<name> <makespan>`` with a PSPLIB name such as ``j1206_9``

    Lines whose first token is not a number or instance name (headers, rules)
    and ``#`` comments are skipped.
    """
    table: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        ident = InstanceId.from_name(tokens[0])
        if ident is not None:
            if len(tokens) < 2:
                raise PSPLIBParseError(f"missing makespan for {tokens[0]}", line=lineno)
            key, value = ident.flat, tokens[1]
        elif tokens[0].isdigit():
            if len(tokens) == 2:
                key, value = int(tokens[0]), tokens[1]
            elif len(tokens) >= 3 and tokens[1].isdigit():
                key, value = InstanceId("", int(tokens[0]), int(tokens[1])).flat, tokens[2]
            else:
                raise PSPLIBParseError(f"cannot read row {line!r}", line=lineno)
        else:
            continue
        try:
            makespan = int(value)
        except ValueError:
            raise PSPLIBParseError(f"makespan {value!r} is not an integer", line=lineno) from None
        if makespan <= 0:
            raise PSPLIBParseError(f"makespan must be positive, got {makespan}", line=lineno)
        if key in table:
            raise DuplicateKeyError(f"instance {key} listed twice (line {lineno})")
        table[key] = makespan
    return table


def render_best_known(table: dict[int, int]) -> str:
    return "".join(f"{key} {value}\n" for key, value in sorted(table.items()))


def load_best_known(path: str | Path) -> dict[int, int]:
    return parse_best_known(Path(path).read_text(encoding="latin-1"))


def data_path(*parts: str) -> Path:
    """Location of a file shipped in the package's ``data`` directory."""
    return Path(str(resources.files("rcpsp_2pga").joinpath("data", *parts)))


def shipped_instances(dataset: str) -> list[Path]:
    """Bundled PSPLIB files for ``dataset`` (``j30``, ``j60`` or ``j120``), in PSPLIB order."""
    folder = data_path("psplib", dataset)
    files = list(folder.glob("*.sm"))
    return sorted(files, key=lambda p: InstanceId.from_name(p.name) or InstanceId("", 0, 0))


def expand_paths(patterns: Iterable[str]) -> list[Path]:
    """Expand files, directories (all ``*.sm`` inside) and glob patterns."""
    found: list[Path] = []
    for pattern in patterns:
        p = Path(pattern)
        if p.is_dir():
            found.extend(sorted(p.glob("*.sm")))
        elif any(ch in pattern for ch in "*?["):
            anchor = Path(p.anchor) if p.is_absolute() else Path(".")
            rel = str(p.relative_to(anchor)) if p.is_absolute() else pattern
            found.extend(sorted(anchor.glob(rel)))
        else:
            found.append(p)
    return found


def result_to_dict(result: RunResult) -> dict:
    return {
        "instance": result.instance_id,
        "seed": result.seed,
        "makespan": result.best.fitness,
        "activity_list": list(result.best.chromosome),
        "schedule": result.best_schedule.to_dict(),
        "generations_run": result.generations_run,
        "schedules_evaluated": result.schedules_evaluated,
        "fitness_trace": list(result.fitness_trace),
    }


def serialize_result(result: RunResult) -> str:
    """JSON text for ``result``; equal results give byte-identical text."""
    return json.dumps(result_to_dict(result), sort_keys=True)


def deserialize_result(text: str) -> RunResult:
    data = json.loads(text)
    schedule = Schedule.from_dict(data["schedule"])
    return RunResult(
        instance_id=data["instance"],
        seed=int(data["seed"]),
        best=Individual(tuple(data["activity_list"]), int(data["makespan"]), False),
        best_schedule=schedule,
        generations_run=int(data["generations_run"]),
        schedules_evaluated=int(data["schedules_evaluated"]),
        fitness_trace=[int(v) for v in data["fitness_trace"]],
    )
