import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcpsp_2pga.operators import (
    MutationRates,
    move_block,
    mutate,
    random_cut_points,
    repair,
    swap_positions,
    two_point_crossover,
)
from rcpsp_2pga.scheduling import ContractViolation, is_precedence_feasible, random_activity_list

from .conftest import make_chain, make_independent


def reference_child(first, second, r1, r2):
    """Crossover steps written out literally over 1-based positions."""
    n = len(first) - 2
    d = {0: first[0], n + 1: first[n + 1]}
    for i in range(1, r1 + 1):
        d[i] = first[i]
    for i in range(r1 + 1, r2 + 1):
        d[i] = next(second[j] for j in range(1, n + 1) if second[j] not in d.values())
    for i in range(r2 + 1, n + 1):
        d[i] = next(first[j] for j in range(r1 + 1, n + 1) if first[j] not in d.values())
    return tuple(d[i] for i in range(n + 2))


def test_crossover_hand_example():
    m = (0, 1, 2, 3, 4, 5)
    f = (0, 2, 1, 4, 3, 5)
    d, s = two_point_crossover(m, f, 1, 3)
    assert d == (0, 1, 2, 4, 3, 5)
    assert s == reference_child(f, m, 1, 3) == (0, 2, 1, 3, 4, 5)


def test_crossover_full_cut_copies_mother():
    m = (0, 1, 2, 3, 4, 5)
    f = (0, 4, 3, 2, 1, 5)
    d, s = two_point_crossover(m, f, 4, 4)
    assert d == m and s == f


@pytest.mark.parametrize("r1,r2", [(0, 1), (2, 1), (1, 5)])
def test_crossover_rejects_bad_cuts(r1, r2):
    m = (0, 1, 2, 3, 4, 5)
    with pytest.raises(ContractViolation):
        two_point_crossover(m, m, r1, r2)


def test_crossover_matches_literal_steps(j30):
    rng = random.Random(17)
    for inst in j30:
        for _ in range(30):
            m = random_activity_list(inst, rng)
            f = random_activity_list(inst, rng)
            r1, r2 = random_cut_points(inst.n_real, rng)
            d, s = two_point_crossover(m, f, r1, r2)
            assert d == reference_child(m, f, r1, r2)
            assert s == reference_child(f, m, r1, r2)


def test_crossover_keeps_feasibility(j30):
    rng = random.Random(23)
    for _ in range(1000):
        inst = rng.choice(j30)
        m, f = random_activity_list(inst, rng), random_activity_list(inst, rng)
        d, s = two_point_crossover(m, f, *random_cut_points(inst.n_real, rng))
        assert is_precedence_feasible(inst, d) and is_precedence_feasible(inst, s)


def test_cut_points_uniform_over_pairs():
    rng = random.Random(0)
    n = 3
    counts = {}
    for _ in range(60_000):
        pair = random_cut_points(n, rng)
        counts[pair] = counts.get(pair, 0) + 1
    assert set(counts) == {(a, b) for a in range(1, n + 1) for b in range(a, n + 1)}
    # 6 pairs, expected 10_000 each; sigma ~ 91
    assert all(abs(c - 10_000) < 400 for c in counts.values())


# --- repair -----------------------------------------------------------------


def test_repair_single_swap():
    chain = make_chain([1, 1])
    assert repair((0, 2, 1, 3), chain) == (0, 1, 2, 3)


def test_repair_fixpoint_on_feasible(j30):
    rng = random.Random(1)
    for inst in j30:
        al = random_activity_list(inst, rng)
        assert repair(al, inst) == al


def test_repair_two_moves():
    chain = make_chain([1, 1, 1])
    assert repair((0, 3, 2, 1, 4), chain) == (0, 1, 2, 3, 4)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 9), st.randoms(use_true_random=False))
def test_repair_makes_any_permutation_feasible(idx, rnd):
    from rcpsp_2pga.psplib_io import load_instance, shipped_instances

    inst = load_instance(shipped_instances("j30")[idx])
    middle = list(range(1, inst.sink))
    rnd.shuffle(middle)
    fixed = repair((0, *middle, inst.sink), inst)
    assert is_precedence_feasible(inst, fixed)
    assert sorted(fixed) == list(range(inst.n_activities))


# --- mutation ---------------------------------------------------------------


def test_zero_rates_are_identity(j30):
    rng = random.Random(2)
    rates = MutationRates(0, 0, 0)
    for inst in j30:
        al = random_activity_list(inst, rng)
        assert mutate(al, inst, rates, rng) == al


def test_forced_swap_then_repair():
    chain = make_chain([1, 1])
    swapped = swap_positions((0, 1, 2, 3), 1, 2)
    assert swapped == (0, 2, 1, 3)
    assert not is_precedence_feasible(chain, swapped)
    assert repair(swapped, chain) == (0, 1, 2, 3)


def test_move_block():
    assert move_block((0, 1, 2, 3, 4, 5, 6), 1, 2, 3) == (0, 3, 4, 1, 2, 5, 6)


def test_mutation_always_feasible(j30):
    rng = random.Random(31)
    rates = MutationRates(1.0, 1.0, 1.0)
    for i in range(10_000):
        inst = j30[i % len(j30)]
        al = random_activity_list(inst, rng) if i % 100 == 0 else al
        al = mutate(al, inst, rates, rng)
        assert is_precedence_feasible(inst, al)
        assert al[0] == 0 and al[-1] == inst.sink


def test_full_rate_mutation_changes_free_lists():
    inst = make_independent(6)
    rng = random.Random(8)
    al = (0, 1, 2, 3, 4, 5, 6, 7)
    assert any(mutate(al, inst, MutationRates(1.0, 0, 0), rng) != al for _ in range(5))


def test_rates_validated():
    with pytest.raises(ValueError):
        MutationRates(single_move=1.5)
