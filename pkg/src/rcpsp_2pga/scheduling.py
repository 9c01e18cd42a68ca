"""RCPSP domain model: instances, activity lists, SSGS decoding and validation.

Activities are numbered ``0..N+1``; ``0`` and ``N+1`` are the dummy source and
sink. Time is a discrete integer grid.
"""

from __future__ import annotations

import bisect
import heapq
import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

ActivityList = tuple[int, ...]


class InstanceError(ValueError):
    """The instance data violates a structural invariant."""


class InfeasibleInstanceError(InstanceError):
    """Some activity demands more of a resource than its capacity."""


class ContractViolation(ValueError):
    """An operation was called with arguments outside its precondition."""


@dataclass(frozen=True)
class ProjectInstance:
    """Single-mode RCPSP instance with renewable resources.

    ``predecessors[j]`` holds the immediate predecessors of activity ``j``.
    ``reversed`` records whether precedence has been flipped for backward
    scheduling; in that orientation the dummies are relabeled so that ``0`` is
    still the unique source.
    """

    durations: tuple[int, ...]
    predecessors: tuple[frozenset[int], ...]
    capacities: tuple[int, ...]
    requirements: tuple[tuple[int, ...], ...]
    name: str = ""
    reversed: bool = False

    def __post_init__(self) -> None:
        n = len(self.durations)
        if n < 2:
            raise InstanceError("an instance needs at least the two dummy activities")
        if len(self.predecessors) != n or len(self.requirements) != n:
            raise InstanceError(
                f"per-activity arrays disagree: {n} durations, "
                f"{len(self.predecessors)} predecessor sets, {len(self.requirements)} requirement rows"
            )
        k = len(self.capacities)
        sink = n - 1
        if self.durations[0] != 0 or self.durations[sink] != 0:
            raise InstanceError("dummy activities must have zero duration")
        if any(d < 0 for d in self.durations):
            raise InstanceError("durations must be non-negative")
        if any(c < 0 for c in self.capacities):
            raise InstanceError("capacities must be non-negative")
        for j, row in enumerate(self.requirements):
            if len(row) != k:
                raise InstanceError(f"activity {j} lists {len(row)} requirements for {k} resources")
            if any(r < 0 for r in row):
                raise InstanceError(f"activity {j} has a negative requirement")
            for res, (r, cap) in enumerate(zip(row, self.capacities)):
                if r > cap:
                    raise InfeasibleInstanceError(
                        f"activity {j} requires {r} of resource {res + 1} but capacity is {cap}"
                    )
        if any(self.requirements[0]) or any(self.requirements[sink]):
            raise InstanceError("dummy activities must not require resources")
        if self.predecessors[0]:
            raise InstanceError("dummy source 0 must not have predecessors")
        for j in range(1, n):
            preds = self.predecessors[j]
            if not preds:
                raise InstanceError(f"activity {j} has no predecessor; it must at least follow 0")
            for i in preds:
                if not 0 <= i < n or i == j:
                    raise InstanceError(f"activity {j} lists invalid predecessor {i}")
                if i == sink:
                    raise InstanceError(f"dummy sink {sink} cannot precede activity {j}")
        if len(self.topological_order) != n:
            raise InstanceError("precedence relation contains a cycle")
        for j in range(n - 1):
            if not self.successors[j]:
                raise InstanceError(f"activity {j} has no successor; the sink {sink} must follow it")

    @classmethod
    def from_real_activities(
        cls,
        durations: Sequence[int],
        requirements: Sequence[Sequence[int]],
        capacities: Sequence[int],
        predecessors: Mapping[int, Iterable[int]] | None = None,
        name: str = "",
    ) -> ProjectInstance:
        """Build an instance from the real activities ``1..N`` only.

        ``durations`` and ``requirements`` are indexed by real activity
        (position 0 is activity 1). Links from the source and to the sink are
        added wherever an activity would otherwise lack them.
        """
        n = len(durations)
        k = len(capacities)
        preds: list[set[int]] = [set() for _ in range(n + 2)]
        for j, ps in (predecessors or {}).items():
            preds[j].update(ps)
        for j in range(1, n + 1):
            if not preds[j]:
                preds[j].add(0)
        has_succ = {i for j in range(1, n + 1) for i in preds[j]}
        preds[n + 1] = {j for j in range(1, n + 1) if j not in has_succ} or {0}
        return cls(
            durations=(0, *map(int, durations), 0),
            predecessors=tuple(frozenset(p) for p in preds),
            capacities=tuple(map(int, capacities)),
            requirements=((0,) * k, *(tuple(map(int, r)) for r in requirements), (0,) * k),
            name=name,
        )

    @property
    def n_real(self) -> int:
        return len(self.durations) - 2

    @property
    def n_activities(self) -> int:
        return len(self.durations)

    @property
    def n_resources(self) -> int:
        return len(self.capacities)

    @property
    def sink(self) -> int:
        return len(self.durations) - 1

    @cached_property
    def successors(self) -> tuple[frozenset[int], ...]:
        succ: list[set[int]] = [set() for _ in self.durations]
        for j, preds in enumerate(self.predecessors):
            for i in preds:
                succ[i].add(j)
        return tuple(frozenset(s) for s in succ)

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        # Kahn's algorithm; a short result signals a cycle.
        indeg = [len(p) for p in self.predecessors]
        succ: list[list[int]] = [[] for _ in self.durations]
        for j, preds in enumerate(self.predecessors):
            for i in preds:
                succ[i].append(j)
        ready = [j for j, d in enumerate(indeg) if d == 0]
        order: list[int] = []
        while ready:
            i = ready.pop()
            order.append(i)
            for j in succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    ready.append(j)
        return tuple(order)

    @cached_property
    def horizon(self) -> int:
        """Sum of all durations; no SSGS decode can finish later."""
        return sum(self.durations)

    @cached_property
    def _demands(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        # (resource, amount) pairs with positive amount, per activity
        return tuple(
            tuple((k, r) for k, r in enumerate(row) if r > 0) for row in self.requirements
        )

    @cached_property
    def _pred_lists(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(sorted(p)) for p in self.predecessors)


@dataclass(frozen=True)
class Schedule:
    """Start and finish time of every activity; makespan is ``f_{N+1}``."""

    starts: tuple[int, ...]
    finishes: tuple[int, ...]

    @property
    def makespan(self) -> int:
        return self.finishes[-1]

    def to_dict(self) -> dict:
        return {"starts": list(self.starts), "finishes": list(self.finishes), "makespan": self.makespan}

    @classmethod
    def from_dict(cls, data: Mapping) -> Schedule:
        return cls(starts=tuple(int(s) for s in data["starts"]), finishes=tuple(int(f) for f in data["finishes"]))


def _relabel(j: int, sink: int) -> int:
    if j == 0:
        return sink
    if j == sink:
        return 0
    return j


def reverse_precedence(instance: ProjectInstance) -> ProjectInstance:
    """Flip every precedence edge and swap the dummy labels.

    Real activities keep their labels; the old sink becomes the new source.
    Applying this twice gives back the original predecessor sets.
    """
    sink = instance.sink
    preds: list[frozenset[int]] = [frozenset()] * instance.n_activities
    for j in range(instance.n_activities):
        preds[_relabel(j, sink)] = frozenset(_relabel(s, sink) for s in instance.successors[j])
    return ProjectInstance(
        durations=instance.durations,
        predecessors=tuple(preds),
        capacities=instance.capacities,
        requirements=instance.requirements,
        name=instance.name,
        reversed=not instance.reversed,
    )


def mirror_schedule(schedule: Schedule, reversed_instance: ProjectInstance) -> Schedule:
    """Map a schedule of ``reversed_instance`` onto the opposite orientation.

    Each activity is flipped around the makespan: ``s' = T - f`` and
    ``f' = T - s``, with the dummy labels swapped back.
    """
    sink = reversed_instance.sink
    horizon = schedule.makespan
    starts = [0] * len(schedule.starts)
    finishes = [0] * len(schedule.starts)
    for j, (s, f) in enumerate(zip(schedule.starts, schedule.finishes)):
        k = _relabel(j, sink)
        starts[k] = horizon - f
        finishes[k] = horizon - s
    return Schedule(tuple(starts), tuple(finishes))


def is_precedence_feasible(instance: ProjectInstance, al: Sequence[int]) -> bool:
    n = instance.n_activities
    if len(al) != n or set(al) != set(range(n)):
        raise ContractViolation(f"activity list is not a permutation of 0..{n - 1}")
    position = [0] * n
    for idx, j in enumerate(al):
        position[j] = idx
    return all(position[i] < position[j] for j in range(n) for i in instance.predecessors[j])


def check_activity_list(instance: ProjectInstance, al: Sequence[int]) -> None:
    """Raise ContractViolation unless ``al`` is a valid activity list."""
    if not is_precedence_feasible(instance, al):
        raise ContractViolation("activity list violates precedence")
    if al[0] != 0 or al[-1] != instance.sink:
        raise ContractViolation("dummy activities must sit at both ends of the list")


def random_activity_list(instance: ProjectInstance, rng: random.Random) -> ActivityList:
    """Random topological order built by picking uniformly from the eligible set."""
    sink = instance.sink
    remaining = [len(p) for p in instance.predecessors]
    succ = instance.successors
    al = [0]
    eligible: list[int] = []
    for j in sorted(succ[0]):
        remaining[j] -= 1
        if remaining[j] == 0 and j != sink:
            eligible.append(j)
    while eligible:
        idx = rng.randrange(len(eligible))
        eligible[idx], eligible[-1] = eligible[-1], eligible[idx]
        j = eligible.pop()
        al.append(j)
        for s in sorted(succ[j]):
            remaining[s] -= 1
            if remaining[s] == 0 and s != sink:
                eligible.append(s)
    al.append(sink)
    return tuple(al)


def ssgs_decode(instance: ProjectInstance, al: Sequence[int], *, check: bool = True) -> Schedule:
    """Serial schedule generation: place each activity at its earliest feasible start.

    Candidate starts are the precedence-earliest time and the finish times of
    already scheduled activities, the only points where free capacity grows.
    """
    if check:
        check_activity_list(instance, al)
    n = instance.n_activities
    durations = instance.durations
    demands = instance._demands
    pred_lists = instance._pred_lists
    horizon = instance.horizon + 1
    avail = [[cap] * horizon for cap in instance.capacities]
    starts = [0] * n
    finishes = [0] * n
    events = [0]  # sorted distinct finish times seen so far
    for j in al:
        d = durations[j]
        t = 0
        for i in pred_lists[j]:
            if finishes[i] > t:
                t = finishes[i]
        need = demands[j]
        if d and need:
            while True:
                conflict = -1
                end = t + d
                for k, r in need:
                    row = avail[k]
                    if min(row[t:end]) < r:
                        tau = end - 1
                        while row[tau] >= r:
                            tau -= 1
                        if tau > conflict:
                            conflict = tau
                if conflict < 0:
                    break
                t = events[bisect.bisect_right(events, conflict)]
            for k, r in need:
                row = avail[k]
                for tau in range(t, t + d):
                    row[tau] -= r
        starts[j] = t
        finishes[j] = t + d
        if d:
            f = t + d
            pos = bisect.bisect_left(events, f)
            if pos == len(events) or events[pos] != f:
                events.insert(pos, f)
    return Schedule(tuple(starts), tuple(finishes))


def critical_path_lower_bound(instance: ProjectInstance) -> int:
    """Longest duration-weighted path from source to sink, ignoring resources."""
    earliest = [0] * instance.n_activities
    for j in instance.topological_order:
        earliest[j] = max((earliest[i] + instance.durations[i] for i in instance.predecessors[j]), default=0)
    return earliest[instance.sink]


def resource_profile(instance: ProjectInstance, schedule: Schedule) -> list[list[int]]:
    """Per-resource usage at each integer time point ``0..makespan-1``."""
    length = max(schedule.finishes, default=0)
    usage = [[0] * length for _ in instance.capacities]
    for j, row in enumerate(instance.requirements):
        for k, r in enumerate(row):
            if r:
                for t in range(schedule.starts[j], schedule.finishes[j]):
                    usage[k][t] += r
    return usage


@dataclass(frozen=True)
class PrecedenceViolation:
    predecessor: int
    successor: int
    predecessor_finish: int
    successor_start: int

    def __str__(self) -> str:
        return (
            f"precedence ({self.predecessor},{self.successor}): activity {self.successor} starts at "
            f"{self.successor_start} before {self.predecessor} finishes at {self.predecessor_finish}"
        )


@dataclass(frozen=True)
class CapacityViolation:
    resource: int  # 1-based, as in PSPLIB files
    time: int
    demand: int
    capacity: int

    def __str__(self) -> str:
        return f"capacity: resource {self.resource} at time {self.time} uses {self.demand} > {self.capacity}"


@dataclass(frozen=True)
class DurationViolation:
    activity: int
    start: int
    finish: int
    duration: int

    def __str__(self) -> str:
        return (
            f"duration: activity {self.activity} runs [{self.start},{self.finish}) "
            f"but its duration is {self.duration}"
        )


@dataclass
class ValidationReport:
    precedence: list[PrecedenceViolation] = field(default_factory=list)
    capacity: list[CapacityViolation] = field(default_factory=list)
    duration: list[DurationViolation] = field(default_factory=list)
    other: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not (self.precedence or self.capacity or self.duration or self.other)

    def violations(self) -> list[str]:
        return [str(v) for v in (*self.duration, *self.precedence, *self.capacity)] + self.other

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "violations": self.violations()}


def validate_schedule(instance: ProjectInstance, schedule: Schedule) -> ValidationReport:
    """List every violated constraint of ``schedule``; an empty report means feasible.

    Deliberately shares no code with :func:`ssgs_decode`.
    """
    n = instance.n_activities
    if len(schedule.starts) != n or len(schedule.finishes) != n:
        raise ContractViolation(
            f"schedule covers {len(schedule.starts)} activities, instance has {n}"
        )
    report = ValidationReport()
    for j in range(n):
        s, f = schedule.starts[j], schedule.finishes[j]
        if f != s + instance.durations[j]:
            report.duration.append(DurationViolation(j, s, f, instance.durations[j]))
        if s < 0:
            report.other.append(f"activity {j} starts at negative time {s}")
    for j in range(n):
        for i in sorted(instance.predecessors[j]):
            if schedule.starts[j] < schedule.finishes[i]:
                report.precedence.append(
                    PrecedenceViolation(i, j, schedule.finishes[i], schedule.starts[j])
                )
    if all(s >= 0 for s in schedule.starts):
        usage = resource_profile(instance, schedule)
        for k, cap in enumerate(instance.capacities):
            for t, used in enumerate(usage[k]):
                if used > cap:
                    report.capacity.append(CapacityViolation(k + 1, t, used, cap))
    if schedule.makespan != max(schedule.finishes):
        report.other.append(
            f"sink finishes at {schedule.makespan} but an activity finishes at {max(schedule.finishes)}"
        )
    return report


def justified_order(schedule: Schedule, target: ProjectInstance) -> ActivityList:
    """Activity list for ``target`` by decreasing finish time in ``schedule``.

    ``schedule`` belongs to the orientation opposite to ``target``. Ties go to
    the lower index of ``target``, except that precedence in ``target`` is
    never broken. Decoding the result under ``target`` never gives a longer
    makespan than ``schedule``.
    """
    sink = target.sink
    finishes = schedule.finishes
    remaining = [len(p) for p in target.predecessors]
    succ = target.successors
    heap = [(0, 0)]
    order: list[int] = []
    while heap:
        _, j = heapq.heappop(heap)
        order.append(j)
        for s in succ[j]:
            remaining[s] -= 1
            if remaining[s] == 0:
                heapq.heappush(heap, (-finishes[_relabel(s, sink)], s))
    return tuple(order)
