import pytest

from app.exceptions import NotReversibleError
from app.services.oracle_service import brute_region
from app.services.pairing_service import BirthDeathPair
from app.services.region_service import (
    Staircase,
    blocking_corners,
    death_region,
    eligible,
    forbidden_regions,
    regions_intersect,
)


def test_lower_left_staircase_keeps_maximal_corners():
    s = Staircase.from_points("lower-left", [(0, 3), (1, 1), (2, 2), (0, 1)])
    assert s.corners == ((0, 3), (2, 2))
    assert s.contains((1, 2))
    assert s.contains((-5, 3))
    assert not s.contains((1, 2.5))
    assert not s.contains((3, 0))


def test_upper_right_staircase_keeps_minimal_corners():
    s = Staircase.from_points("upper-right", [(1, 4), (2, 2), (3, 3), (4, 1)])
    assert s.corners == ((1, 4), (2, 2), (4, 1))
    assert s.contains((2.5, 2))
    assert s.contains((10, 1))
    assert not s.contains((1.5, 3))


def test_staircase_inclusion():
    big = Staircase.from_points("lower-left", [(2, 2)])
    small = Staircase.from_points("lower-left", [(1, 1), (0, 2)])
    assert big.contains_staircase(small)
    assert not small.contains_staircase(big)


def test_closed_quadrants_touching_at_a_corner_intersect():
    death = Staircase.from_points("lower-left", [(2, 2)])
    birth = Staircase.from_points("upper-right", [(2, 2)])
    assert blocking_corners(death, birth) == ((2, 2), (2, 2))
    assert not regions_intersect(death, Staircase.from_points("upper-right", [(2, 2.5)]))
    assert not regions_intersect(death, Staircase("upper-right"))


def test_regions_of_hollow_triangle(triangle_state):
    regions = forbidden_regions(triangle_state, BirthDeathPair(0, "b", "ab"))
    assert regions.death_region.as_lists() == [[0.0, 0.0]]
    assert regions.birth_region.as_lists() == [[4.0, 4.0]]
    assert not regions.intersect


def test_regions_match_their_definition(triangle_state):
    for pair in triangle_state.off_diagonal():
        regions = forbidden_regions(triangle_state, pair)
        brute = brute_region(triangle_state, pair)
        for point in [(0, 0), (0.5, 0.5), (1, 3), (4, 4), (4.5, 5), (5, 5), (-1, 10)]:
            assert regions.death_region.contains(point) == brute.in_death_region(point)
            assert regions.birth_region.contains(point) == brute.in_birth_region(point)
        assert regions.intersect == brute.intersect()


def test_essential_pairs_have_no_regions(triangle_state):
    with pytest.raises(NotReversibleError):
        death_region(triangle_state, BirthDeathPair(0, "a"))


def test_eligible_pairs_of_hollow_triangle(triangle_state):
    for pair in triangle_state.off_diagonal():
        result = eligible(triangle_state, pair)
        assert result.eligible
        assert result.path_count == 1
        assert result.reasons == []


def test_critical_shallow_pair_is_eligible(path_state):
    pair = path_state.pair_of("uv")
    result = eligible(path_state, pair)
    assert result.eligible
    assert result.regions.birth_region.empty
    assert result.to_dict()["pair"] == "(w, uv)"
