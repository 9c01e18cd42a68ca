import itertools
import random
from functools import cache

import pytest

from rcpsp_2pga.evolution import GaParams, run_2pga
from rcpsp_2pga.oracle import (
    InstanceTooLarge,
    TinyInstanceBudget,
    brute_force_best,
    enumerate_linear_extensions,
    random_instance,
)
from rcpsp_2pga.scheduling import (
    critical_path_lower_bound,
    is_precedence_feasible,
    ssgs_decode,
    validate_schedule,
)

from .conftest import make_chain, make_independent


def count_extensions(instance):
    """Linear extensions of the real activities, counted by DP over placed subsets."""
    n = instance.n_real
    need = [0] * (n + 1)
    for j in range(1, n + 1):
        for i in instance.predecessors[j]:
            if i != 0:
                need[j] |= 1 << (i - 1)

    @cache
    def ways(placed):
        if placed == (1 << n) - 1:
            return 1
        return sum(
            ways(placed | 1 << (j - 1))
            for j in range(1, n + 1)
            if not placed >> (j - 1) & 1 and need[j] & placed == need[j]
        )

    return ways(0)


def test_chain_has_one_extension():
    assert list(enumerate_linear_extensions(make_chain([1, 2, 3]))) == [(0, 1, 2, 3, 4)]


def test_independent_activities_give_all_permutations():
    exts = list(enumerate_linear_extensions(make_independent(3)))
    assert len(exts) == 6
    assert {e[1:-1] for e in exts} == set(itertools.permutations((1, 2, 3)))


def test_t1_extensions(t1):
    assert sorted(e[1:-1] for e in enumerate_linear_extensions(t1)) == [(1, 2, 3), (1, 3, 2), (2, 1, 3)]


def test_empty_project_has_one_extension():
    assert list(enumerate_linear_extensions(make_independent(0))) == [(0, 1)]


def test_extension_count_matches_dp():
    rng = random.Random(0)
    for _ in range(60):
        inst = random_instance(rng, rng.randint(0, 8), edge_probability=rng.random())
        exts = list(enumerate_linear_extensions(inst))
        assert len(exts) == len(set(exts)) == count_extensions(inst)
        assert all(is_precedence_feasible(inst, e) for e in exts)


def test_brute_force_examples(t1):
    assert brute_force_best(t1) == 5
    chain = make_chain([2, 4, 1])
    assert brute_force_best(chain) == critical_path_lower_bound(chain) == 7
    assert brute_force_best(make_independent(2)) == 2


def test_brute_force_is_lower_bound_for_every_list():
    rng = random.Random(1)
    for _ in range(20):
        inst = random_instance(rng, 6, 2)
        best = brute_force_best(inst)
        assert critical_path_lower_bound(inst) <= best <= inst.horizon
        assert all(ssgs_decode(inst, e).makespan >= best for e in enumerate_linear_extensions(inst))


def test_refuses_large_instances():
    with pytest.raises(InstanceTooLarge):
        brute_force_best(make_independent(9))
    assert brute_force_best(make_independent(9), TinyInstanceBudget(9)) == 9


def test_solver_never_beats_oracle():
    rng = random.Random(2)
    for k in range(10):
        inst = random_instance(rng, 6, 2)
        result = run_2pga(inst, GaParams(seed=k, schedule_budget=300))
        assert result.makespan >= brute_force_best(inst)
        assert validate_schedule(inst, result.best_schedule).feasible


def test_random_instance_shape():
    inst = random_instance(random.Random(3), 7, 2, max_capacity=3)
    assert inst.n_real == 7 and inst.n_resources == 2
    assert all(0 < c <= 3 for c in inst.capacities)
    assert all(i < j or i == 0 for j in range(1, 8) for i in inst.predecessors[j])
