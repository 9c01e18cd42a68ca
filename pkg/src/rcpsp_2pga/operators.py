"""Genetic operators on activity lists: two-point crossover, mutation, repair.

All operators keep the dummy activities at both ends of the list.
"""

from __future__ import annotations

import random
from collections.abc import Sequence
from dataclasses import dataclass

from .scheduling import ActivityList, ContractViolation, ProjectInstance

MAX_GROUP_LENGTH = 5


@dataclass(frozen=True)
class MutationRates:
    """Per-individual probability of each mutation form, sampled independently."""

    single_move: float = 0.05
    exchange: float = 0.05
    group_move: float = 0.02

    def __post_init__(self) -> None:
        for name in ("single_move", "exchange", "group_move"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} rate must lie in [0, 1], got {p}")


def _fill(child: list[int], taken: set[int], source: Sequence[int], stop: int) -> None:
    # Append the lowest-index entries of ``source`` not yet taken until ``child`` has ``stop`` entries.
    for j in source:
        if len(child) >= stop:
            return
        if j not in taken:
            child.append(j)
            taken.add(j)


def _build_child(first: Sequence[int], second: Sequence[int], r1: int, r2: int) -> ActivityList:
    n = len(first) - 2
    child = list(first[: r1 + 1])
    taken = set(child)
    _fill(child, taken, second[1 : n + 1], r2 + 1)
    _fill(child, taken, first[r1 + 1 : n + 1], n + 1)
    child.append(first[n + 1])
    return tuple(child)


def two_point_crossover(
    mother: Sequence[int], father: Sequence[int], r1: int, r2: int
) -> tuple[ActivityList, ActivityList]:
    """Two-point crossover with cut points ``0 < r1 <= r2 <= N``.

    The daughter takes positions ``1..r1`` from the mother, fills
    ``r1+1..r2`` with the father's activities in his order, skipping those
    already present, and completes with the mother's remaining activities in
    her order. The son is built the same way with the roles swapped.
    Precedence-feasible parents give precedence-feasible children.
    """
    n = len(mother) - 2
    if len(father) != n + 2:
        raise ContractViolation("parents have different lengths")
    if not 0 < r1 <= r2 <= n:
        raise ContractViolation(f"cut points must satisfy 0 < r1 <= r2 <= {n}, got r1={r1}, r2={r2}")
    return _build_child(mother, father, r1, r2), _build_child(father, mother, r1, r2)


def random_cut_points(n_real: int, rng: random.Random) -> tuple[int, int]:
    """Uniform draw from all pairs ``0 < r1 <= r2 <= n_real``."""
    # distinct x < y in 1..N+1 map one-to-one onto r1 = x, r2 = y - 1
    x, y = sorted(rng.sample(range(1, n_real + 2), 2))
    return x, y - 1


def move_activity(al: Sequence[int], src: int, dst: int) -> ActivityList:
    """Remove the activity at position ``src`` and reinsert it at ``dst``."""
    out = list(al)
    out.insert(dst, out.pop(src))
    return tuple(out)


def swap_positions(al: Sequence[int], i: int, j: int) -> ActivityList:
    out = list(al)
    out[i], out[j] = out[j], out[i]
    return tuple(out)


def move_block(al: Sequence[int], start: int, length: int, dst: int) -> ActivityList:
    """Move ``al[start:start+length]`` so that it begins at position ``dst`` of the result."""
    out = list(al)
    block = out[start : start + length]
    del out[start : start + length]
    out[dst:dst] = block
    return tuple(out)


def repair(al: Sequence[int], instance: ProjectInstance) -> ActivityList:
    """Restore precedence feasibility by moving offending activities later.

    Scans left to right; an activity with a predecessor further right is
    reinserted directly after the rightmost of its predecessors. Passes repeat
    until one finds nothing to move.
    """
    out = list(al)
    preds = instance.predecessors
    while True:
        moved = False
        position = {j: idx for idx, j in enumerate(out)}
        idx = 1
        while idx < len(out) - 1:
            j = out[idx]
            last = max((position[i] for i in preds[j]), default=-1)
            if last > idx:
                out.insert(last, out.pop(idx))
                position = {a: p for p, a in enumerate(out)}
                moved = True
                continue
            idx += 1
        if not moved:
            return tuple(out)


def mutate(
    al: Sequence[int], instance: ProjectInstance, rates: MutationRates, rng: random.Random
) -> ActivityList:
    """Apply each mutation form with its own probability, then repair.

    Forms: move one activity, exchange two activities, move a contiguous group
    of 2..5 activities. Any combination may fire on the same list.
    """
    n = len(al) - 2
    out = tuple(al)
    changed = False
    if n >= 2 and rng.random() < rates.single_move:
        src = rng.randint(1, n)
        dst = rng.randint(1, n - 1)
        if dst >= src:
            dst += 1
        out = move_activity(out, src, dst)
        changed = True
    if n >= 2 and rng.random() < rates.exchange:
        i, j = rng.sample(range(1, n + 1), 2)
        out = swap_positions(out, i, j)
        changed = True
    if n >= 3 and rng.random() < rates.group_move:
        length = rng.randint(2, min(MAX_GROUP_LENGTH, n - 1))
        start = rng.randint(1, n - length + 1)
        dst = rng.randint(1, n - length)
        if dst >= start:
            dst += 1
        out = move_block(out, start, length, dst)
        changed = True
    return repair(out, instance) if changed else out
