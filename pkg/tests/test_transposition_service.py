import numpy as np
import pytest

from app.exceptions import AdjacencyError, CriterionHypothesisError, TranspositionPreconditionError
from app.services.complex_service import LefschetzComplex
from app.services.generator_service import random_complex, random_dmf
from app.services.oracle_service import brute_reduce, diff_states
from app.services.pairing_service import BirthDeathPair, build_state, check_incoming_shrink, incoming_relations, relation
from app.services.transposition_service import (
    TranspositionEvent,
    TranspositionKind,
    criterion_entry,
    quadrant_entry,
    transpose,
    transpose_births,
    transpose_deaths,
    transpose_mixed,
    transpose_with_vector,
)

B_AB = BirthDeathPair(0, "b", "ab")
C_BC = BirthDeathPair(0, "c", "bc")


def assert_matches_fresh_reduction(state):
    diff = diff_states(state, brute_reduce(state.complex, state.values))
    assert not diff, diff.summary()


def test_birth_swap_updates_a_row(hollow_triangle):
    state = build_state(*hollow_triangle)
    outcome = transpose_births(state, C_BC, B_AB)
    assert outcome.case == 1
    assert outcome.predicted_case == 1
    assert outcome.criterion_value == 1
    assert not outcome.pairing_switched
    assert state.orders[0] == ["a", "c", "b"]
    assert state.values["b"] == 2 and state.values["c"] == 1
    assert relation(state, "ab", "bc", "hom")
    assert state.pair_of("ab") == B_AB
    assert_matches_fresh_reduction(state)


def test_death_swap_updates_a_dual_row(hollow_triangle):
    state = build_state(*hollow_triangle)
    outcome = transpose_deaths(state, B_AB, C_BC)
    assert outcome.case == 1
    assert outcome.predicted_case == 1
    assert state.orders[1] == ["bc", "ab", "ca"]
    assert relation(state, "c", "b", "cohom")
    assert state.pairs() == [BirthDeathPair(0, "a"), B_AB, C_BC, BirthDeathPair(1, "ca")]
    assert_matches_fresh_reduction(state)


def test_criterion_matches_quadrant_clearing(hollow_triangle):
    state = build_state(*hollow_triangle)
    assert criterion_entry(state, C_BC, B_AB, "birth") == quadrant_entry(state, C_BC, B_AB, "birth") == 1
    assert criterion_entry(state, B_AB, C_BC, "death") == quadrant_entry(state, B_AB, C_BC, "death") == 1


def test_birth_swap_precondition(hollow_triangle):
    state = build_state(*hollow_triangle)
    with pytest.raises(TranspositionPreconditionError):
        transpose_births(state, B_AB, C_BC)


def test_non_adjacent_cells_are_rejected(hollow_triangle):
    state = build_state(*hollow_triangle)
    with pytest.raises(AdjacencyError):
        transpose(state, "a", "c")
    with pytest.raises(AdjacencyError):
        transpose(state, "a", "ab")


def test_mixed_swap_changes_nothing():
    # ab2 closes a cycle right before bc kills c
    X = LefschetzComplex(
        {"a": 0, "b": 0, "c": 0, "ab": 1, "ab2": 1, "bc": 1},
        {"ab": ["a", "b"], "ab2": ["a", "b"], "bc": ["b", "c"]},
    )
    state = build_state(X, {"a": 0, "b": 1, "ab": 2, "ab2": 3, "c": 4, "bc": 5})
    before = state.pairs()
    event = TranspositionEvent(TranspositionKind.MIXED, "ab2", "bc", 1)
    outcome = transpose_mixed(state, event)
    assert outcome.case == 3
    assert not outcome.changed
    assert state.pairs() == before
    assert state.orders[1] == ["ab", "bc", "ab2"]
    assert_matches_fresh_reduction(state)


def test_mixed_swap_needs_birth_then_death(hollow_triangle):
    state = build_state(*hollow_triangle)
    with pytest.raises(TranspositionPreconditionError):
        transpose_mixed(state, TranspositionEvent(TranspositionKind.MIXED, "bc", "ca", 1))


def test_vector_block_swaps_with_a_critical_cell():
    X = LefschetzComplex({"a": 0, "b": 0, "z": 0, "ab": 1}, {"ab": ["a", "b"]})
    state = build_state(X, {"a": 0, "b": 1, "ab": 1, "z": 2})
    outcome = transpose_with_vector(state, ("b", "ab"), ("z",), {"a", "z"})
    assert outcome.case == 3
    assert state.values == {"a": 0, "z": 1, "b": 2, "ab": 2}
    assert state.orders[0] == ["a", "z", "b"]
    assert_matches_fresh_reduction(state)


def test_vector_swap_needs_a_vector(segment):
    state = build_state(*segment)
    with pytest.raises(TranspositionPreconditionError):
        transpose_with_vector(state, ("a",), ("b",), {"a"})


def test_death_swap_switches_related_pairs():
    # bc adds ac during the reduction, so (c, ac) →× (b, bc)
    X = LefschetzComplex({"a": 0, "b": 0, "c": 0, "ac": 1, "bc": 1}, {"ac": ["a", "c"], "bc": ["b", "c"]})
    state = build_state(X, {"a": 0, "b": 1, "c": 2, "ac": 3, "bc": 4})
    alpha, beta = BirthDeathPair(0, "b", "bc"), BirthDeathPair(0, "c", "ac")
    assert state.pair_of("bc") == alpha and state.pair_of("ac") == beta
    outcome = transpose_deaths(state, alpha, beta)
    assert outcome.predicted_case == outcome.case == 2
    assert ("_1", "bc") in outcome.columns_reduced
    assert state.pair_of("bc") == BirthDeathPair(0, "c", "bc")
    assert state.pair_of("ac") == BirthDeathPair(0, "b", "ac")
    assert_matches_fresh_reduction(state)


def test_birth_swap_switches_related_pairs():
    # u - a - b - t: the dual reduction of a adds b, so (b, ab) →∘ (a, ua)
    X = LefschetzComplex(
        {"u": 0, "a": 0, "b": 0, "t": 0, "ab": 1, "ua": 1, "bt": 1},
        {"ab": ["a", "b"], "ua": ["u", "a"], "bt": ["b", "t"]},
    )
    state = build_state(X, {"u": 0, "a": 1, "b": 2, "t": 3, "ab": 4, "ua": 5, "bt": 6})
    alpha, beta = BirthDeathPair(0, "a", "ua"), BirthDeathPair(0, "b", "ab")
    assert relation(state, "b", "a", "cohom")
    outcome = transpose_births(state, alpha, beta)
    assert outcome.predicted_case == outcome.case == 2
    assert state.pair_of("ab") == BirthDeathPair(0, "a", "ab")
    assert state.pair_of("ua") == BirthDeathPair(0, "b", "ua")
    assert_matches_fresh_reduction(state)


def test_essential_cell_takes_over_a_low():
    X = LefschetzComplex({"a": 0, "b": 0, "ab": 1}, {"ab": ["a", "b"]})
    state = build_state(X, {"a": 0, "b": 1, "ab": 2})
    outcome = transpose(state, "a", "b")
    assert outcome.pairing_switched
    assert state.pair_of("ab") == BirthDeathPair(0, "a", "ab")
    assert state.pair_of("b") == BirthDeathPair(0, "b")
    assert_matches_fresh_reduction(state)


@pytest.mark.parametrize("seed", range(10))
def test_random_transpositions_match_fresh_reduction(seed):
    X = random_complex(seed, vertices=7, maximal=6)
    state = build_state(X, random_dmf(X, seed))
    rng = np.random.default_rng(seed)
    dims = [k for k, order in state.orders.items() if len(order) > 1]
    for _ in range(25):
        k = dims[int(rng.integers(len(dims)))]
        i = int(rng.integers(len(state.orders[k]) - 1))
        transpose(state, state.orders[k][i], state.orders[k][i + 1])
        assert_matches_fresh_reduction(state)


@pytest.mark.parametrize("seed", range(10))
def test_random_criterion_matches_quadrant_clearing(seed):
    X = random_complex(seed, vertices=7, maximal=6)
    state = build_state(X, random_dmf(X, seed))
    finite = [p for p in state.pairs() if p.death is not None]
    for alpha in finite:
        for beta in finite:
            if alpha == beta or alpha.dim != beta.dim:
                continue
            if relation(state, beta.death, alpha.death, "hom") or relation(state, beta.birth, alpha.birth, "cohom"):
                continue
            for side in ("birth", "death"):
                try:
                    value = criterion_entry(state, alpha, beta, side)
                except CriterionHypothesisError:
                    continue
                assert value == quadrant_entry(state, alpha, beta, side)


@pytest.mark.parametrize("seed", range(10))
def test_switch_free_swaps_add_no_relation_into_the_moving_pair(seed):
    X = random_complex(seed, vertices=7, maximal=6)
    state = build_state(X, random_dmf(X, seed))
    rng = np.random.default_rng(seed + 100)
    dims = [k for k, order in state.orders.items() if len(order) > 1]
    for _ in range(25):
        k = dims[int(rng.integers(len(dims)))]
        i = int(rng.integers(len(state.orders[k]) - 1))
        first, second = state.orders[k][i], state.orders[k][i + 1]
        # first's birth moves up, second's death moves down
        moving = [p for p in (state.pair_of(first),) if p.birth == first]
        moving += [p for p in (state.pair_of(second),) if p.death == second]
        before = {p: set(incoming_relations(state, p)) for p in moving}
        outcome = transpose(state, first, second)
        if outcome.pairing_switched:
            continue
        for pair, sources in before.items():
            check_incoming_shrink(sources, state, pair)
