"""
Region Service
==============

Description: Forbidden regions and eligibility
Version: 1.0.0

Forbidden regions of a birth-death pair and the eligibility test.

The death region is a union of closed lower-left quadrants [-inf,a]x[-inf,b],
the birth region a union of closed upper-right quadrants [c,inf]x[d,inf].
Both are stored as staircases of extremal corners.
"""

import logging
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Literal, Optional

from app.config import PATH_COUNT_CAP
from app.exceptions import NotReversibleError
from app.services.complex_service import CellId
from app.services.morse_state import MorseState
from app.services.pairing_service import BirthDeathPair, incoming_relations
from app.services.vector_field_service import count_paths

logger = logging.getLogger(__name__)

Orientation = Literal["lower-left", "upper-right"]
Point = tuple[float, float]


@dataclass(frozen=True)
class Staircase:
    """
    Corners sorted by x. Lower-left staircases keep the maximal corners (y
    strictly decreasing), upper-right ones the minimal corners (y strictly
    decreasing as well, read from left to right).
    """
    orientation: Orientation
    corners: tuple[Point, ...] = ()

    @classmethod
    def from_points(cls, orientation: Orientation, points: Iterable[Point]) -> "Staircase":
        pts = sorted(set(points))
        kept: list[Point] = []
        if orientation == "lower-left":
            # sweep right to left, keep points higher than everything to their right
            best = float("-inf")
            for x, y in reversed(pts):
                if y > best:
                    kept.append((x, y))
                    best = y
            kept.reverse()
        else:
            best = float("inf")
            for x, y in pts:
                if y < best:
                    kept.append((x, y))
                    best = y
        return cls(orientation, tuple(kept))

    @property
    def empty(self) -> bool:
        return not self.corners

    def __len__(self) -> int:
        return len(self.corners)

    def contains(self, point: Point) -> bool:
        px, py = point
        if self.orientation == "lower-left":
            # first corner with x >= px has the largest y among those
            i = bisect_left(self.corners, (px, float("-inf")))
            return i < len(self.corners) and self.corners[i][1] >= py
        # last corner with x <= px has the smallest y among those
        i = bisect_right(self.corners, (px, float("inf"))) - 1
        return i >= 0 and self.corners[i][1] <= py

    def contains_staircase(self, other: "Staircase") -> bool:
        return other.orientation == self.orientation and all(self.contains(c) for c in other.corners)

    def as_lists(self) -> list[list[float]]:
        return [[x, y] for x, y in self.corners]


@dataclass(frozen=True)
class ForbiddenRegionPair:
    death_region: Staircase
    birth_region: Staircase

    @property
    def intersect(self) -> bool:
        return regions_intersect(self.death_region, self.birth_region)

    def contains(self, other: "ForbiddenRegionPair") -> bool:
        return (
            self.death_region.contains_staircase(other.death_region)
            and self.birth_region.contains_staircase(other.birth_region)
        )


@dataclass
class Eligibility:
    pair: BirthDeathPair
    eligible: bool
    path_count: int
    regions: ForbiddenRegionPair
    blocking: Optional[tuple[Point, Point]] = None
    reasons: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "pair": str(self.pair),
            "eligible": self.eligible,
            "path_count": self.path_count,
            "blocking": [list(c) for c in self.blocking] if self.blocking else None,
            "reasons": list(self.reasons),
        }


def _off_diagonal(state: MorseState, pair: BirthDeathPair) -> None:
    if pair.death is None:
        raise NotReversibleError(f"Pair {pair} is essential", cells=list(pair.cells))


def death_region(state: MorseState, pair: BirthDeathPair) -> Staircase:
    """Maximal corners of the β →× α quadrants and of the critical cells below d_α."""
    _off_diagonal(state, pair)
    h = state.reduced.values
    points = []
    for source, kind in incoming_relations(state.reduced, pair):
        if kind == "hom":
            beta = state.pair_of(source)
            points.append((h[beta.birth], h[beta.death]))
    for x in state.field.descendants(pair.death):
        if x in state.criticals and x not in pair.cells:
            points.append((h[x], h[x]))
    return Staircase.from_points("lower-left", points)


def birth_region(state: MorseState, pair: BirthDeathPair) -> Staircase:
    """Minimal corners of the β →∘ α quadrants and of the critical cells above b_α."""
    _off_diagonal(state, pair)
    h = state.reduced.values
    points = []
    for source, kind in incoming_relations(state.reduced, pair):
        if kind == "cohom":
            beta = state.pair_of(source)
            if beta.death is not None:
                points.append((h[beta.birth], h[beta.death]))
    for y in state.field.ancestors(pair.birth):
        if y in state.criticals and y not in pair.cells:
            points.append((h[y], h[y]))
    return Staircase.from_points("upper-right", points)


def forbidden_regions(state: MorseState, pair: BirthDeathPair) -> ForbiddenRegionPair:
    return ForbiddenRegionPair(death_region(state, pair), birth_region(state, pair))


def blocking_corners(death: Staircase, birth: Staircase) -> Optional[tuple[Point, Point]]:
    """
    A lower-left corner (a,b) and an upper-right corner (c,d) with c <= a and
    d <= b, found by one sweep over both corner lists sorted by x.
    """
    if death.empty or birth.empty:
        return None
    events = sorted(
        [(c[0], 0, c) for c in birth.corners] + [(c[0], 1, c) for c in death.corners]
    )
    lowest: Optional[Point] = None
    for _, kind, corner in events:
        if kind == 0:
            if lowest is None or corner[1] < lowest[1]:
                lowest = corner
        elif lowest is not None and lowest[1] <= corner[1]:
            return corner, lowest
    return None


def regions_intersect(death: Staircase, birth: Staircase) -> bool:
    return blocking_corners(death, birth) is not None


def eligible(state: MorseState, pair: BirthDeathPair) -> Eligibility:
    """Regions disjoint and exactly one gradient path from d_α to b_α."""
    regions = forbidden_regions(state, pair)
    blocking = blocking_corners(regions.death_region, regions.birth_region)
    paths = count_paths(state.field, pair.death, pair.birth, cap=PATH_COUNT_CAP)
    reasons = []
    if blocking is not None:
        reasons.append(f"forbidden regions intersect at {blocking[0]} / {blocking[1]}")
    if paths.count == 0:
        reasons.append("not reversible: no gradient path")
    elif paths.count > 1:
        reasons.append("not reversible: more than one gradient path")
    result = Eligibility(pair, not reasons, paths.count, regions, blocking, reasons)
    logger.debug(f"eligible({pair}) = {result.eligible} {reasons}")
    return result
