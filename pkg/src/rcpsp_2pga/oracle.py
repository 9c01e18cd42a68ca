"""Exhaustive reference solver for tiny instances, and a random tiny-instance generator."""

from __future__ import annotations

import random
from collections.abc import Iterator
from dataclasses import dataclass

from .scheduling import ActivityList, ProjectInstance, ssgs_decode


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class TinyInstanceBudget:
    max_real_activities: int = 8

    def check(self, instance: ProjectInstance) -> None:
        if instance.n_real > self.max_real_activities:
            raise InstanceTooLarge(
                f"{instance.n_real} real activities exceed the enumeration cap of {self.max_real_activities}"
            )


DEFAULT_BUDGET = TinyInstanceBudget()


def enumerate_linear_extensions(
    instance: ProjectInstance, budget: TinyInstanceBudget = DEFAULT_BUDGET
) -> Iterator[ActivityList]:
    """Yield every precedence-feasible activity list exactly once."""
    budget.check(instance)
    sink = instance.sink
    succ = [sorted(s) for s in instance.successors]
    remaining = [len(p) for p in instance.predecessors]
    prefix = [0]
    for s in succ[0]:
        remaining[s] -= 1

    def extend() -> Iterator[ActivityList]:
        if len(prefix) == sink:
            yield (*prefix, sink)
            return
        eligible = [j for j in range(1, sink) if remaining[j] == 0 and j not in placed]
        for j in eligible:
            placed.add(j)
            prefix.append(j)
            for s in succ[j]:
                remaining[s] -= 1
            yield from extend()
            for s in succ[j]:
                remaining[s] += 1
            prefix.pop()
            placed.discard(j)

    placed: set[int] = set()
    yield from extend()


def brute_force_best(instance: ProjectInstance, budget: TinyInstanceBudget = DEFAULT_BUDGET) -> int:
    """Minimum SSGS makespan over all activity lists, which is the optimum."""
    return min(ssgs_decode(instance, al, check=False).makespan for al in enumerate_linear_extensions(instance, budget))


def random_instance(
    rng: random.Random,
    n_real: int,
    n_resources: int = 1,
    *,
    max_duration: int = 5,
    edge_probability: float = 0.3,
    max_capacity: int = 4,
    resource_factor: float = 1.0,
    name: str = "",
) -> ProjectInstance:
    """Random instance: arcs only go from lower to higher index, so it is acyclic.

    Each activity uses each resource with probability ``resource_factor``,
    demanding between 1 and the full capacity.
    """
    capacities = [rng.randint(1, max_capacity) for _ in range(n_resources)]
    durations = [rng.randint(1, max_duration) for _ in range(n_real)]
    requirements = [
        [rng.randint(1, cap) if rng.random() < resource_factor else 0 for cap in capacities]
        for _ in range(n_real)
    ]
    predecessors = {
        j: [i for i in range(1, j) if rng.random() < edge_probability] for j in range(1, n_real + 1)
    }
    return ProjectInstance.from_real_activities(durations, requirements, capacities, predecessors, name=name)
