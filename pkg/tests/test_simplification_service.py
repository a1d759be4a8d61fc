import math
import time

import pytest

from app.exceptions import IneligiblePairError, MoveSpecError, NotReversibleError
from app.services.complex_service import DiscreteMorseFunction, LefschetzComplex, validate_dmf
from app.services.generator_service import random_dmf, simplex_skeleton
from app.services.morse_state import MorseState
from app.services.pairing_service import BirthDeathPair
from app.services.region_service import eligible
from app.services.simplification_service import (
    MoveSpec,
    apply_move,
    cancel_pair,
    check_move,
    choose_gap,
    journey_to_diagonal,
    move_right,
    pair_entry,
    reverse_path_dmf,
    simplify_all,
)
from app.services.vector_field_service import GradientPath, induced_vector_field, morse_complex

B_AB = BirthDeathPair(0, "b", "ab")
C_BC = BirthDeathPair(0, "c", "bc")


def test_right_move_past_a_birth(triangle_state):
    spec = choose_gap(triangle_state, B_AB, "right")
    assert spec.bypass == "c"
    assert 2 < spec.delta < spec.xi < 3
    record = apply_move(triangle_state, spec, verify=True)
    assert record.outcome.case == 1
    assert triangle_state.dmf("b") == pytest.approx(spec.delta)
    assert triangle_state.critical_after("b") == "ab"
    assert triangle_state.pair_of("b") == B_AB


def test_check_move_rejects_occupied_interval(triangle_state):
    with pytest.raises(MoveSpecError):
        check_move(triangle_state, MoveSpec("right", B_AB, 1.5, 2.5, "c"))


def test_check_move_rejects_reversed_bounds(triangle_state):
    with pytest.raises(MoveSpecError):
        move_right(triangle_state, MoveSpec("right", B_AB, 2.6, 2.4, "c"))


def test_move_drags_glued_cells(path_state):
    spec = choose_gap(path_state, BirthDeathPair(0, "w", "uv"), "right", squeeze=True)
    h = move_right(path_state, spec)
    assert h("v") == h("wv")
    assert spec.delta <= h("w") < h("v") <= spec.xi
    assert validate_dmf(path_state.complex, h).valid
    assert induced_vector_field(path_state.complex, h) == path_state.field


def test_journey_ends_on_the_gradient_path(triangle_state):
    trace = journey_to_diagonal(triangle_state.copy(), B_AB, verify=True)
    assert [m.spec.direction for m in trace.moves] == ["right", "right", "down"]
    assert trace.path.ascending() == ("b", "ab")


def test_reverse_path_dmf_formula():
    path = GradientPath(("uv", "v", "wv", "w"))
    h = DiscreteMorseFunction({"u": 0, "w": 1.0, "wv": 1.2, "v": 1.2, "uv": 1.5})
    h2 = reverse_path_dmf(h, BirthDeathPair(0, "w", "uv"), path)
    assert h2.as_dict() == {"u": 0, "w": 1.5, "wv": 1.5, "v": 1.2, "uv": 1.2}


def test_reverse_path_dmf_needs_an_isolated_path(path_state):
    path = GradientPath(("uv", "v", "wv", "w"))
    with pytest.raises(NotReversibleError):
        reverse_path_dmf(path_state.dmf.with_values({"u": 1.5}), BirthDeathPair(0, "w", "uv"), path)


def test_cancel_first_pair_of_hollow_triangle(triangle_state):
    new_state, result = cancel_pair(triangle_state, B_AB, verify=True)
    assert new_state.criticals == {"a", "c", "bc", "ca"}
    assert ("b", "ab") in new_state.field.vectors
    assert new_state.morse.facets("bc") == {"a", "c"}
    assert result.lifetime == 2
    assert 0 < result.perturbation <= result.lifetime
    assert new_state.dmf("b") == new_state.dmf("ab")
    # the input state is untouched
    assert triangle_state.criticals == {"a", "b", "c", "ab", "bc", "ca"}
    assert triangle_state.dmf("b") == 1


def test_cancel_both_pairs_leaves_the_essentials(triangle_state):
    state, _ = cancel_pair(triangle_state, B_AB, verify=True)
    state, result = cancel_pair(state, state.pair_of("c"), verify=True)
    assert state.criticals == {"a", "ca"}
    assert state.morse.facets("ca") == frozenset()
    assert state.off_diagonal() == []
    assert result.perturbation <= 2


def test_cancel_through_a_vector(path_state):
    pair = path_state.pair_of("uv")
    entry = pair_entry(path_state, pair)
    state, result = cancel_pair(path_state, pair, verify=True)
    assert state.criticals == {"u"}
    assert state.field.vectors == {("v", "uv"), ("w", "wv")}
    report = result.to_report(entry)
    assert report.path == ["w", "wv", "v", "uv"]
    assert report.pair.birth == "w"
    assert report.perturbation <= report.lifetime == 2


def test_essential_pair_cannot_be_cancelled(triangle_state):
    with pytest.raises(IneligiblePairError):
        cancel_pair(triangle_state, BirthDeathPair(0, "a"))


def test_two_paths_cancel_in_the_morse_boundary(hollow_triangle):
    X, _ = hollow_triangle
    # (b, ab) and (c, bc) are vectors: ca reaches a twice
    h = DiscreteMorseFunction({"a": 0, "b": 1, "ab": 1, "c": 2, "bc": 2, "ca": 3})
    state = MorseState.build(X, h)
    assert state.criticals == {"a", "ca"}
    assert state.morse.facets("ca") == frozenset()


def test_simplify_all_on_hollow_triangle(triangle_state):
    state, report, results = simplify_all(triangle_state, verify=True)
    assert [e.birth for e in report.standard_cancelled] == ["b", "c"]
    assert report.region_cancelled == []
    assert report.not_cancellable == []
    assert not report.incomplete
    assert report.counts == {0: {"standard_cancelled": 2}}
    assert len(results) == 2
    assert state.criticals == {"a", "ca"}


def test_simplify_all_regions_only(triangle_state):
    _, report, _ = simplify_all(triangle_state, policy="regions-only")
    assert report.standard_cancelled == []
    assert report.cancelled == 2


def test_simplify_all_respects_the_limit(triangle_state):
    seen = []
    _, report, results = simplify_all(triangle_state, limit=1, on_cancel=lambda s, r: seen.append(r.pair))
    assert len(results) == 1
    assert seen == [B_AB]
    assert report.incomplete
    assert [e.birth for e in report.not_cancellable] == ["c"]


def test_simplify_all_respects_the_deadline(triangle_state):
    _, report, results = simplify_all(triangle_state, deadline=time.perf_counter() - 1)
    assert results == []
    assert report.incomplete
    assert len(report.not_cancellable) == 2


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_simplify_random_states_keeps_the_dmf_valid(random_state, seed):
    state = random_state(seed, vector_rate=0.2)
    before = len(state.off_diagonal())
    state, report, results = simplify_all(state)
    assert validate_dmf(state.complex, state.dmf).valid
    assert report.cancelled + len(report.not_cancellable) == before
    assert all(r.perturbation <= r.lifetime for r in results)


def test_relocation_refuses_to_merge_values():
    # w is dragged right together with x, xw, v and vx
    X = LefschetzComplex(
        {"u": 0, "v": 0, "x": 0, "w": 0, "uv": 1, "vx": 1, "xw": 1},
        {"uv": ["u", "v"], "vx": ["v", "x"], "xw": ["x", "w"]},
    )
    h = DiscreteMorseFunction({"u": 0, "w": 1, "x": 2, "xw": 2, "v": 3, "vx": 3, "uv": 4})
    state = MorseState.build(X, h)
    pair = BirthDeathPair(0, "w", "uv")
    assert state.pair_of("uv") == pair
    with pytest.raises(MoveSpecError, match="order"):
        move_right(state, MoveSpec("right", pair, 3.5, math.nextafter(3.5, 4.0)))


def test_cancel_keeps_the_other_critical_values_exact(hollow_triangle):
    X, _ = hollow_triangle
    h = DiscreteMorseFunction({"a": 0.1, "b": 0.7, "c": 1.3, "ab": 2.9, "bc": 3.05, "ca": 4.4})
    state, result = cancel_pair(MorseState.build(X, h), B_AB, verify=True)
    assert {c: state.dmf(c) for c in state.criticals} == {"a": 0.1, "c": 1.3, "bc": 3.05, "ca": 4.4}
    assert state.dmf("b") == state.dmf("ab")
    assert 0.7 <= state.dmf("b") <= 2.9
    assert result.perturbation <= result.lifetime


def _cancel_eligible(state: MorseState, limit: int) -> int:
    cancelled = 0
    for pair in state.off_diagonal():
        if cancelled == limit:
            break
        if not eligible(state, pair).eligible:
            continue
        new_state, result = cancel_pair(state, pair, verify=True)
        assert not set(pair.cells) & new_state.criticals
        assert induced_vector_field(new_state.complex, new_state.dmf) == new_state.field
        assert morse_complex(new_state.field) == new_state.morse
        assert validate_dmf(new_state.complex, new_state.dmf).valid
        assert result.perturbation <= result.lifetime
        untouched = state.criticals - set(pair.cells)
        assert all(new_state.dmf(c) == state.dmf(c) for c in untouched)
        cancelled += 1
    return cancelled


@pytest.mark.parametrize("seed", range(6))
def test_random_eligible_pairs_cancel_under_verification(random_state, seed):
    _cancel_eligible(random_state(seed, vector_rate=0.2), limit=4)


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1])
def test_banded_simplex_pairs_cancel_under_verification(seed):
    X = simplex_skeleton(4)
    state = MorseState.build(X, random_dmf(X, seed, banded=True))
    assert _cancel_eligible(state, limit=3) > 0
