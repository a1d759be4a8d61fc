"""
Complex Service
===============

Description: Lefschetz complexes, discrete Morse functions and their validation
Version: 1.0.0

Lefschetz complexes and discrete Morse functions.

Cells are identified by opaque string ids. The boundary is stored as the set of
facets (coefficient 1 over Z2) of every cell; the coboundary is derived.
"""

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Optional

import networkx as nx

from app.exceptions import MissingValueError, NoGapError
from app.models.complex import ValidationReport

logger = logging.getLogger(__name__)

CellId = str


@dataclass(frozen=True)
class Cell:
    id: CellId
    dim: int


class LefschetzComplex:
    """
    Finite cell set with dimensions and a Z2 boundary.

    The instance is an immutable snapshot: every "mutation" (quotients,
    restrictions) builds a new complex. Facet references to unknown ids are
    kept so that validate_complex can report them.
    """

    __slots__ = ("_dims", "_facets", "_cofacets")

    def __init__(self, dims: Mapping[CellId, int], facets: Mapping[CellId, Iterable[CellId]]):
        self._dims: dict[CellId, int] = dict(dims)
        self._facets: dict[CellId, frozenset] = {
            cell: frozenset(facets.get(cell, ())) for cell in self._dims
        }
        cofacets: dict[CellId, set] = defaultdict(set)
        for cell, fs in self._facets.items():
            for face in fs:
                if face in self._dims:
                    cofacets[face].add(cell)
        self._cofacets: dict[CellId, frozenset] = {
            cell: frozenset(cofacets.get(cell, ())) for cell in self._dims
        }

    @classmethod
    def from_cells(cls, cells: Iterable[Cell], boundary: Iterable[tuple[CellId, CellId]] = ()):
        """Build from Cell objects and (facet, cofacet) pairs."""
        dims = {c.id: c.dim for c in cells}
        facets: dict[CellId, set] = defaultdict(set)
        for x, y in boundary:
            facets[y].add(x)
        return cls(dims, facets)

    def __len__(self) -> int:
        return len(self._dims)

    def __contains__(self, cell: CellId) -> bool:
        return cell in self._dims

    def __iter__(self) -> Iterator[CellId]:
        return iter(self._dims)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LefschetzComplex):
            return NotImplemented
        return self._dims == other._dims and self._facets == other._facets

    def __repr__(self) -> str:
        return f"LefschetzComplex(cells={len(self)}, max_dim={self.max_dim})"

    @property
    def ids(self) -> list[CellId]:
        return list(self._dims)

    @property
    def cells(self) -> list[Cell]:
        return [Cell(cid, d) for cid, d in self._dims.items()]

    @property
    def max_dim(self) -> int:
        return max(self._dims.values(), default=-1)

    def dim(self, cell: CellId) -> int:
        return self._dims[cell]

    def facets(self, cell: CellId) -> frozenset:
        return self._facets[cell]

    def cofacets(self, cell: CellId) -> frozenset:
        return self._cofacets[cell]

    def coefficient(self, x: CellId, y: CellId) -> int:
        """D(x, y): 1 iff x is a facet of y."""
        return 1 if x in self._facets.get(y, ()) else 0

    def cells_of_dim(self, k: int) -> list[CellId]:
        return [c for c, d in self._dims.items() if d == k]

    def boundary_pairs(self) -> Iterator[tuple[CellId, CellId]]:
        for y, fs in self._facets.items():
            for x in fs:
                yield x, y

    def facet_map(self) -> dict[CellId, frozenset]:
        return dict(self._facets)

    def restricted(self, keep: Iterable[CellId]) -> "LefschetzComplex":
        keep = set(keep)
        return LefschetzComplex(
            {c: d for c, d in self._dims.items() if c in keep},
            {c: self._facets[c] & keep for c in self._dims if c in keep},
        )

    def hasse_graph(self, cells: Optional[Iterable[CellId]] = None) -> nx.Graph:
        """Undirected Hasse diagram, optionally restricted to a cell subset."""
        nodes = set(self._dims) if cells is None else set(cells)
        graph = nx.Graph()
        graph.add_nodes_from(nodes)
        for y in nodes:
            graph.add_edges_from((x, y) for x in self._facets[y] if x in nodes)
        return graph


class DiscreteMorseFunction:
    """
    Real filter on cells. Values are compared with exact float equality:
    ties only ever arise from deliberate constructions.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Mapping[CellId, float]):
        self._values: dict[CellId, float] = {c: float(v) for c, v in values.items()}

    def __call__(self, cell: CellId) -> float:
        return self.value(cell)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteMorseFunction):
            return NotImplemented
        return self._values == other._values

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, cell: CellId) -> bool:
        return cell in self._values

    def __repr__(self) -> str:
        return f"DiscreteMorseFunction({len(self._values)} values)"

    def value(self, cell: CellId) -> float:
        try:
            return self._values[cell]
        except KeyError:
            raise MissingValueError(f"Missing value for cell {cell}", cells=[cell])

    def as_dict(self) -> dict[CellId, float]:
        return dict(self._values)

    def with_values(self, updates: Mapping[CellId, float]) -> "DiscreteMorseFunction":
        values = dict(self._values)
        values.update(updates)
        return DiscreteMorseFunction(values)

    def restricted(self, cells: Iterable[CellId]) -> "DiscreteMorseFunction":
        return DiscreteMorseFunction({c: self._values[c] for c in cells})

    def interpolate(self, other: "DiscreteMorseFunction", t: float) -> dict[CellId, float]:
        """(1-t)·self + t·other, as a plain map (it need not be a dMf)."""
        return {c: (1.0 - t) * v + t * other.value(c) for c, v in self._values.items()}

    def max_deviation(self, other: "DiscreteMorseFunction") -> float:
        return max((abs(v - other.value(c)) for c, v in self._values.items()), default=0.0)

    def ranked(self) -> tuple["DiscreteMorseFunction", list[float]]:
        """
        Dense ranks 0, 1, ... of the distinct values (order and ties kept),
        with the sorted distinct values to map them back.
        """
        knots = sorted(set(self._values.values()))
        rank = {v: float(i) for i, v in enumerate(knots)}
        return DiscreteMorseFunction({c: rank[v] for c, v in self._values.items()}), knots

    def from_ranks(self, knots: list[float]) -> "DiscreteMorseFunction":
        """
        Inverse of `ranked` extended piecewise linearly: integer ranks map
        exactly onto their knot, fractional ones between the two neighbours.

        Raises:
            NoGapError: two distinct values land on the same float
        """
        mapped: dict[float, float] = {}
        for r in set(self._values.values()):
            k = min(max(int(math.floor(r)), 0), len(knots) - 1)
            if r == k or k + 1 == len(knots):
                mapped[r] = knots[k]
            else:
                lo, hi = knots[k], knots[k + 1]
                mapped[r] = min(max(lo + (r - k) * (hi - lo), lo), hi)
        hits = Counter(mapped.values())
        if len(hits) < len(mapped):
            merged = sorted(c for c, v in self._values.items() if hits[mapped[v]] > 1)
            raise NoGapError("Distinct values collapse when mapped back from ranks", cells=merged)
        return DiscreteMorseFunction({c: mapped[v] for c, v in self._values.items()})


def h_order(X: LefschetzComplex, h: DiscreteMorseFunction) -> list[CellId]:
    """Cells sorted by value, ties broken by dimension (then id for determinism)."""
    return sorted(X, key=lambda c: (h(c), X.dim(c), c))


def validate_complex(X: LefschetzComplex) -> ValidationReport:
    """
    Report every violated dimension condition, dangling facet reference and
    square-zero condition. Never raises.
    """
    report = ValidationReport(subject="complex")
    for x, y in sorted(X.boundary_pairs()):
        if x not in X:
            report.add("dangling", [x, y], f"facet {x} of {y} is not a cell")
        elif X.dim(x) + 1 != X.dim(y):
            report.add("dimension", [x, y], f"dim {x} = {X.dim(x)}, dim {y} = {X.dim(y)}")

    for y in X:
        parity: dict[CellId, int] = defaultdict(int)
        for z in X.facets(y):
            if z not in X:
                continue
            for x in X.facets(z):
                parity[x] ^= 1
        for x in sorted(c for c, p in parity.items() if p):
            report.add("square-zero", [x, y], f"odd number of facet chains from {x} to {y}")

    if not report.valid:
        logger.debug(f"Complex validation found {len(report.violations)} violations")
    return report


def validate_dmf(X: LefschetzComplex, h: DiscreteMorseFunction) -> ValidationReport:
    """
    Check weak monotonicity, the pairing condition and almost-injectivity.

    A value shared by two cells that are not facet and cofacet is a pairing
    violation, whatever their dimensions.

    Raises:
        MissingValueError: some cell has no value
    """
    for cell in X:
        if cell not in h:
            raise MissingValueError(f"Missing value for cell {cell}", cells=[cell])

    report = ValidationReport(subject="dmf")
    for x, y in sorted(X.boundary_pairs()):
        if x in X and h(x) > h(y):
            report.add("weak-monotonicity", [x, y], f"h({x})={h(x)} > h({y})={h(y)}")

    by_value: dict[float, list[CellId]] = defaultdict(list)
    for cell in X:
        by_value[h(cell)].append(cell)
    for value, group in sorted(by_value.items()):
        if len(group) > 2:
            report.add("almost-injective", sorted(group), f"{len(group)} cells share value {value}")
        for x, y in combinations(sorted(group), 2):
            if not (X.coefficient(x, y) or X.coefficient(y, x)):
                report.add("pairing", [x, y], f"{x} and {y} share value {value} but are not facet and cofacet")
    return report


def induced_partition(X: LefschetzComplex, f: Mapping[CellId, float]) -> set[frozenset]:
    """
    Maximal constant-value classes that are connected in the Hasse diagram.
    `f` is an arbitrary map and need not be a dMf.
    """
    groups: dict[float, list[CellId]] = defaultdict(list)
    for cell in X:
        groups[f[cell]].append(cell)
    classes: set[frozenset] = set()
    for group in groups.values():
        if len(group) == 1:
            classes.add(frozenset(group))
            continue
        for component in nx.connected_components(X.hasse_graph(group)):
            classes.add(frozenset(component))
    return classes
