"""
Vector Field Service
====================

Description: Gradient fields, paths and Morse complexes
Version: 1.0.0

Combinatorial vector fields, gradient paths and Morse complexes.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

import networkx as nx

from app.config import PATH_COUNT_CAP
from app.exceptions import NotCriticalError, NotGradientError, NotReversibleError
from app.services.complex_service import CellId, DiscreteMorseFunction, LefschetzComplex

logger = logging.getLogger(__name__)

Vector = tuple[CellId, CellId]


class CombinatorialVectorField:
    """
    Partition of a complex into vectors (facet, cofacet) and critical cells.

    The digraph G_V has an explicit arc x -> y for every vector (x, y) and an
    implicit arc y -> x for every facet x of y with (x, y) not a vector.
    Construction checks the partition and acyclicity unless check=False.
    """

    def __init__(self, complex: LefschetzComplex, vectors: Iterable[Vector], check: bool = True):
        self.complex = complex
        self.vectors = frozenset(vectors)
        self._partner: dict[CellId, CellId] = {}
        for x, y in self.vectors:
            for cell in (x, y):
                if cell in self._partner:
                    raise NotGradientError(f"Cell {cell} belongs to two vectors", cells=[cell])
            self._partner[x] = y
            self._partner[y] = x
        self.criticals = frozenset(c for c in complex if c not in self._partner)
        self._graph: Optional[nx.DiGraph] = None
        if check:
            self.check_gradient()

    def __eq__(self, other) -> bool:
        if not isinstance(other, CombinatorialVectorField):
            return NotImplemented
        return self.vectors == other.vectors and self.criticals == other.criticals

    def __repr__(self) -> str:
        return f"CombinatorialVectorField(vectors={len(self.vectors)}, criticals={len(self.criticals)})"

    def is_critical(self, cell: CellId) -> bool:
        return cell in self.criticals

    def partner(self, cell: CellId) -> Optional[CellId]:
        return self._partner.get(cell)

    def is_vector(self, x: CellId, y: CellId) -> bool:
        return self._partner.get(x) == y and self.complex.dim(x) < self.complex.dim(y)

    @property
    def graph(self) -> nx.DiGraph:
        if self._graph is None:
            X = self.complex
            graph = nx.DiGraph()
            graph.add_nodes_from(X)
            for y in X:
                for x in X.facets(y):
                    if x not in X:
                        continue
                    if self._partner.get(x) == y:
                        graph.add_edge(x, y)
                    else:
                        graph.add_edge(y, x)
            self._graph = graph
        return self._graph

    def check_gradient(self) -> None:
        X = self.complex
        for x, y in self.vectors:
            if x not in X or y not in X:
                raise NotGradientError(f"Vector ({x}, {y}) references unknown cells", cells=[x, y])
            if not X.coefficient(x, y):
                raise NotGradientError(f"Vector ({x}, {y}) is not a facet pair", cells=[x, y])
        if not nx.is_directed_acyclic_graph(self.graph):
            cycle = nx.find_cycle(self.graph)
            raise NotGradientError(
                "Vector field has a closed path",
                cells=[u for u, _ in cycle],
            )

    def classes(self) -> set[frozenset]:
        return {frozenset(v) for v in self.vectors} | {frozenset([c]) for c in self.criticals}

    def reaches(self, source: CellId, target: CellId) -> bool:
        """source ⤳ target through a non-trivial path of G_V."""
        if source == target:
            return False
        return nx.has_path(self.graph, source, target)

    def descendants(self, cell: CellId) -> set[CellId]:
        return nx.descendants(self.graph, cell)

    def ancestors(self, cell: CellId) -> set[CellId]:
        return nx.ancestors(self.graph, cell)

    def with_vectors(self, removed: Iterable[Vector], added: Iterable[Vector]) -> "CombinatorialVectorField":
        vectors = (set(self.vectors) - set(removed)) | set(added)
        return CombinatorialVectorField(self.complex, vectors)


@dataclass(frozen=True)
class GradientPath:
    """
    Alternating path in G_V listed from its top cell down to its bottom cell:
    top, z_1, y_1, z_2, ..., bottom.
    """
    cells: tuple[CellId, ...]

    @property
    def top(self) -> CellId:
        return self.cells[0]

    @property
    def bottom(self) -> CellId:
        return self.cells[-1]

    def __len__(self) -> int:
        return len(self.cells)

    def ascending(self) -> tuple[CellId, ...]:
        """bottom = x_0, ..., x_m = top."""
        return tuple(reversed(self.cells))

    def inner_vectors(self) -> list[Vector]:
        """Vectors (z_i, y_i) traversed by the path."""
        return [(self.cells[i], self.cells[i + 1]) for i in range(1, len(self.cells) - 1, 2)]


class PathCount(NamedTuple):
    count: int
    parity: int

    @property
    def unique(self) -> bool:
        return self.count == 1


def induced_vector_field(X: LefschetzComplex, h: DiscreteMorseFunction) -> CombinatorialVectorField:
    """V_h: the nonempty preimages of a valid dMf."""
    by_value: dict[float, list[CellId]] = {}
    for cell in X:
        by_value.setdefault(h(cell), []).append(cell)
    vectors = []
    for group in by_value.values():
        if len(group) == 2:
            x, y = sorted(group, key=X.dim)
            vectors.append((x, y))
    return CombinatorialVectorField(X, vectors)


def partition_of(V: CombinatorialVectorField) -> set[frozenset]:
    return V.classes()


def _band(V: CombinatorialVectorField, source: CellId, k: int) -> set[CellId]:
    """Cells reachable from source along arcs that stay in dimensions {k, k+1}."""
    X = V.complex
    graph = V.graph
    seen = {source}
    stack = [source]
    while stack:
        node = stack.pop()
        for succ in graph.successors(node):
            if succ not in seen and X.dim(succ) in (k, k + 1):
                seen.add(succ)
                stack.append(succ)
    return seen


def _path_counts_from(V: CombinatorialVectorField, y: CellId, k: int, cap: int) -> dict[CellId, PathCount]:
    nodes = _band(V, y, k)
    try:
        order = list(nx.topological_sort(V.graph.subgraph(nodes)))
    except nx.NetworkXUnfeasible:
        raise NotGradientError("Vector field has a closed path", cells=[y])
    counts = {y: 1}
    parities = {y: 1}
    for node in order:
        if node not in counts:
            continue
        c, p = counts[node], parities[node]
        for succ in V.graph.successors(node):
            if succ in nodes:
                counts[succ] = min(cap, counts.get(succ, 0) + c)
                parities[succ] = parities.get(succ, 0) ^ p
    return {cell: PathCount(counts[cell], parities[cell]) for cell in counts}


def count_paths(V: CombinatorialVectorField, y: CellId, x: CellId, cap: int = PATH_COUNT_CAP) -> PathCount:
    """
    Number of paths from y to x in G_V restricted to dimensions
    {dim x, dim x + 1}, saturated at `cap`, together with its exact parity.
    """
    if y == x:
        return PathCount(min(1, cap), 1)
    X = V.complex
    k = X.dim(x)
    if X.dim(y) not in (k, k + 1):
        return PathCount(0, 0)
    return _path_counts_from(V, y, k, cap).get(x, PathCount(0, 0))


def find_path(V: CombinatorialVectorField, y: CellId, x: CellId) -> GradientPath:
    """
    The unique gradient path from y down to x.

    Raises:
        NotReversibleError: no path, or more than one
    """
    count = count_paths(V, y, x, cap=2)
    if count.count != 1:
        raise NotReversibleError(
            f"not reversible: {count.count if count.count < 2 else '2 or more'} paths from {y} to {x}",
            cells=[y, x],
        )
    X = V.complex
    k = X.dim(x)
    # walk forward, always to the unique successor that still reaches x
    reaching = _band_reverse(V, x, k)
    path = [y]
    node = y
    while node != x:
        node = next(s for s in V.graph.successors(node) if s in reaching)
        path.append(node)
    return GradientPath(tuple(path))


def _band_reverse(V: CombinatorialVectorField, target: CellId, k: int) -> set[CellId]:
    X = V.complex
    seen = {target}
    stack = [target]
    while stack:
        node = stack.pop()
        for pred in V.graph.predecessors(node):
            if pred not in seen and X.dim(pred) in (k, k + 1):
                seen.add(pred)
                stack.append(pred)
    return seen


def morse_complex(V: CombinatorialVectorField) -> LefschetzComplex:
    """Complex on crit(V) whose boundary is the parity of gradient paths."""
    X = V.complex
    facets: dict[CellId, set[CellId]] = {}
    for y in V.criticals:
        k = X.dim(y) - 1
        if k < 0:
            facets[y] = set()
            continue
        counts = _path_counts_from(V, y, k, cap=2)
        facets[y] = {
            x for x, c in counts.items()
            if c.parity and x != y and x in V.criticals and X.dim(x) == k
        }
    return LefschetzComplex({c: X.dim(c) for c in V.criticals}, facets)


def morse_function(h: DiscreteMorseFunction, V: CombinatorialVectorField) -> DiscreteMorseFunction:
    """h_M: restriction of h to the critical cells."""
    return h.restricted(V.criticals)


def reverse_path(V: CombinatorialVectorField, path: GradientPath) -> CombinatorialVectorField:
    """
    V^{-ρ}: shift the matching along the unique path between two critical
    cells so that its endpoints become matched.
    """
    t, s = path.top, path.bottom
    for cell in (t, s):
        if not V.is_critical(cell):
            raise NotCriticalError(f"Path endpoint {cell} is not critical", cells=[cell])
    if V.complex.dim(s) + 1 != V.complex.dim(t):
        raise NotReversibleError(f"Endpoints {t} and {s} are not in consecutive dimensions", cells=[t, s])
    count = count_paths(V, t, s, cap=2)
    if count.count != 1:
        raise NotReversibleError(f"not reversible: {t} and {s} are joined by several paths", cells=[t, s])

    removed = path.inner_vectors()
    cells = path.cells
    added = [(cells[i + 1], cells[i]) for i in range(0, len(cells) - 1, 2)]
    logger.debug(f"Reversing path {t} -> {s} ({len(cells)} cells)")
    return V.with_vectors(removed, added)


def restore_path(V: CombinatorialVectorField, path: GradientPath) -> CombinatorialVectorField:
    """Inverse of reverse_path: the endpoints become critical again."""
    cells = path.cells
    removed = [(cells[i + 1], cells[i]) for i in range(0, len(cells) - 1, 2)]
    for vector in removed:
        if vector not in V.vectors:
            raise NotReversibleError(f"Vector {vector} is not in the field", cells=list(vector))
    return V.with_vectors(removed, path.inner_vectors())
