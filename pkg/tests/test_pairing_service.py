import pytest

from app.exceptions import InvariantViolationError, NotShallowError
from app.services.complex_service import LefschetzComplex
from app.services.generator_service import random_complex, random_dmf
from app.services.pairing_service import (
    BirthDeathPair,
    build_state,
    cancel_in_matrix,
    check_incoming_shrink,
    check_relations,
    clear_quadrant,
    incoming_relations,
    is_critical_shallow,
    is_shallow,
    lefschetz_cancel,
    obstacle_count,
    pair_relations,
    quotient_state,
    relation,
    relation_graph,
)
from app.services.oracle_service import brute_reduce, diff_states
from app.services.z2_service import boundary_matrix

B_AB = BirthDeathPair(0, "b", "ab")
C_BC = BirthDeathPair(0, "c", "bc")


def test_hollow_triangle_pairs(hollow_triangle):
    state = build_state(*hollow_triangle)
    assert state.pairs() == [
        BirthDeathPair(0, "a"),
        B_AB,
        C_BC,
        BirthDeathPair(1, "ca"),
    ]
    assert state.persistence(B_AB) == 2
    assert state.pair_class(BirthDeathPair(1, "ca")) == "essential"


def test_hollow_triangle_relations(hollow_triangle):
    state = build_state(*hollow_triangle)
    assert relation(state, "ab", "ca", "hom")
    assert relation(state, "b", "a", "cohom")
    assert not relation(state, "a", "b", "cohom")
    graph = relation_graph(state)
    assert graph.hom == {("ab", "ca"), ("bc", "ca")}
    assert graph.cohom == {("b", "a"), ("c", "a")}
    essential_a = BirthDeathPair(0, "a")
    assert sorted(incoming_relations(state, essential_a)) == [("b", "cohom"), ("c", "cohom")]
    assert {(beta.birth, alpha.birth, kind) for beta, alpha, kind in pair_relations(state)} == {
        ("b", "a", "cohom"),
        ("c", "a", "cohom"),
    }


def test_shallow_pairs_of_hollow_triangle(hollow_triangle):
    state = build_state(*hollow_triangle)
    assert is_shallow(B_AB, state)
    assert is_shallow(C_BC, state)
    assert not is_shallow(BirthDeathPair(0, "a"), state)


def test_vector_makes_a_pair_critical_shallow(path_graph):
    state = build_state(*path_graph)
    pair = state.pair_of("uv")
    assert pair == BirthDeathPair(0, "w", "uv")
    assert state.pair_class(state.pair_of("wv")) == "diagonal"
    assert not is_shallow(pair, state)
    assert is_critical_shallow(pair, state)


def test_obstacle_count(hollow_triangle):
    state = build_state(*hollow_triangle)
    assert obstacle_count(state, B_AB) == 1
    assert obstacle_count(state, C_BC) == 1
    assert obstacle_count(state, BirthDeathPair(0, "a")) == 0


def test_lefschetz_cancel_reroutes_boundaries(hollow_triangle):
    X, _ = hollow_triangle
    quotient = lefschetz_cancel(X, ("b", "ab")).complex
    assert set(quotient) == {"a", "c", "bc", "ca"}
    assert quotient.facets("bc") == {"a", "c"}


def test_cancel_in_matrix_matches_quotient(hollow_triangle):
    X, h = hollow_triangle
    B = cancel_in_matrix(boundary_matrix(X, h, 1), "b", "ab")
    assert B.row_order == ("a", "c")
    assert B.col_order == ("bc", "ca")
    assert B.column("bc") == {"a", "c"}


def test_quotient_state_agrees_with_fresh_reduction(hollow_triangle):
    X, h = hollow_triangle
    state = build_state(X, h)
    quotient = quotient_state(state, B_AB)
    assert quotient.complex.facets("bc") == {"a", "c"}
    assert quotient.pairs() == [BirthDeathPair(0, "a"), C_BC, BirthDeathPair(1, "ca")]
    oracle = brute_reduce(quotient.complex, quotient.values)
    assert not diff_states(quotient, oracle)


def test_quotient_state_refuses_deep_pairs(path_graph):
    state = build_state(*path_graph)
    with pytest.raises(NotShallowError):
        quotient_state(state, BirthDeathPair(0, "w", "uv"))


def test_clear_quadrant_cancels_nested_pair():
    # (b, ab) lies in the bottom-right quadrant of (d, cd)
    X = LefschetzComplex(
        {"a": 0, "c": 0, "b": 0, "ab": 1, "cd": 1, "d": 0},
        {"ab": ["a", "b"], "cd": ["c", "d"]},
    )
    h = {"a": 0, "c": 1, "d": 2, "b": 3, "ab": 4, "cd": 5}
    state = build_state(X, h)
    outer = state.pair_of("cd")
    assert outer == BirthDeathPair(0, "d", "cd")
    cleared = clear_quadrant(state, outer, None, 0)
    assert not cleared.has_col("ab")
    assert not cleared.has_row("b")
    assert cleared.column("cd") == {"c", "d"}


@pytest.mark.parametrize("seed", range(10))
def test_random_shallow_quotients_agree_with_fresh_reduction(seed):
    X = random_complex(seed, vertices=7, maximal=6)
    state = build_state(X, random_dmf(X, seed))
    shallow = [p for p in state.pairs() if is_shallow(p, state)]
    for pair in shallow:
        quotient = quotient_state(state, pair)
        assert pair.birth not in quotient.complex and pair.death not in quotient.complex
        expected = [p for p in state.pairs() if p != pair]
        assert quotient.pairs() == expected
        assert not diff_states(quotient, brute_reduce(quotient.complex, quotient.values))


@pytest.mark.parametrize("seed", range(10))
def test_quadrant_clearing_does_not_depend_on_the_order(seed):
    X = random_complex(seed, vertices=7, maximal=6)
    state = build_state(X, random_dmf(X, seed))
    for alpha in state.pairs():
        if alpha.death is None:
            continue
        by_persistence = clear_quadrant(state, alpha, None, alpha.dim)
        latest = clear_quadrant(state, alpha, None, alpha.dim, strategy="latest")
        assert by_persistence == latest


@pytest.mark.parametrize("seed", range(10))
def test_relations_point_up_and_left(seed):
    X = random_complex(seed, vertices=7, maximal=6)
    check_relations(build_state(X, random_dmf(X, seed, vector_rate=0.3)))


def test_relation_pointing_the_wrong_way_is_reported(hollow_triangle):
    state = build_state(*hollow_triangle)
    check_relations(state)
    # (c, bc) dies after (b, ab)
    state.boundary[1].U.toggle("bc", "ab")
    with pytest.raises(InvariantViolationError, match="up and to the left"):
        check_relations(state)


def test_relation_from_an_essential_cell_is_reported(hollow_triangle):
    state = build_state(*hollow_triangle)
    state.boundary[1].U.toggle("ca", "bc")
    with pytest.raises(InvariantViolationError, match="not a death"):
        check_relations(state)


def test_new_incoming_relation_is_reported(hollow_triangle):
    state = build_state(*hollow_triangle)
    essential_a = BirthDeathPair(0, "a")
    before_a = set(incoming_relations(state, essential_a))
    before_c = set(incoming_relations(state, C_BC))
    # dropping a relation is fine, gaining one is not
    state.coboundary[0].U.toggle("b", "a")
    check_incoming_shrink(before_a, state, essential_a)
    state.boundary[1].U.toggle("ab", "bc")
    with pytest.raises(InvariantViolationError, match="appeared"):
        check_incoming_shrink(before_c, state, C_BC)
