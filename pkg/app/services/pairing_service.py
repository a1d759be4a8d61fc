"""
Pairing Service
===============

Description: Pairs, relations, shallow quotients and quadrant clearing
Version: 1.0.0

Birth-death pairs, homological/cohomological relations, shallow pairs,
Lefschetz cancellation and quadrant clearing.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal, Mapping, Optional

from app.exceptions import (
    InvariantViolationError,
    NotShallowError,
    PairingMismatchError,
    QuadrantClearingError,
    SimplificationError,
    UnknownPairError,
)
from app.services.complex_service import CellId, DiscreteMorseFunction, LefschetzComplex
from app.services.z2_service import (
    ReductionTriple,
    Z2SparseMatrix,
    boundary_matrix,
    coboundary_matrix,
    lazy_reduce,
)

logger = logging.getLogger(__name__)

RelationKind = Literal["hom", "cohom"]
PairClass = Literal["off-diagonal", "diagonal", "essential"]


@dataclass(frozen=True, order=True)
class BirthDeathPair:
    dim: int
    birth: CellId
    death: Optional[CellId] = None

    @property
    def essential(self) -> bool:
        return self.death is None

    @property
    def cells(self) -> tuple[CellId, ...]:
        return (self.birth,) if self.death is None else (self.birth, self.death)

    def __str__(self) -> str:
        return f"({self.birth}, {self.death if self.death is not None else '-'})"


@dataclass(frozen=True)
class RelationGraph:
    hom: frozenset
    cohom: frozenset


@dataclass(frozen=True)
class QuotientComplex:
    base: LefschetzComplex
    removed: tuple[CellId, CellId]
    complex: LefschetzComplex


@dataclass
class ReducedState:
    """
    Boundary and coboundary reductions of every dimension of a complex in a
    filter order. `orders[k]` is the order of the k-cells; `values` are the
    filter values, kept consistent with the orders by the callers.
    """
    complex: LefschetzComplex
    values: dict
    orders: dict
    boundary: dict = field(default_factory=dict)
    coboundary: dict = field(default_factory=dict)

    def copy(self) -> "ReducedState":
        return ReducedState(
            self.complex,
            dict(self.values),
            {k: list(v) for k, v in self.orders.items()},
            {k: t.copy() for k, t in self.boundary.items()},
            {k: t.copy() for k, t in self.coboundary.items()},
        )

    def dim(self, cell: CellId) -> int:
        return self.complex.dim(cell)

    def value(self, cell: CellId) -> float:
        return self.values[cell]

    def position(self, cell: CellId) -> int:
        return self.orders[self.dim(cell)].index(cell)

    def death_of(self, cell: CellId) -> Optional[CellId]:
        triple = self.boundary.get(self.dim(cell) + 1)
        return triple.pivots.get(cell) if triple else None

    def birth_of(self, cell: CellId) -> Optional[CellId]:
        triple = self.boundary.get(self.dim(cell))
        return triple.lows.get(cell) if triple else None

    def is_birth(self, cell: CellId) -> bool:
        return self.death_of(cell) is not None

    def is_death(self, cell: CellId) -> bool:
        return self.birth_of(cell) is not None

    def pair_of(self, cell: CellId) -> BirthDeathPair:
        if cell not in self.complex:
            raise UnknownPairError(f"Unknown cell {cell}", cells=[cell])
        birth = self.birth_of(cell)
        if birth is not None:
            return BirthDeathPair(self.dim(birth), birth, cell)
        return BirthDeathPair(self.dim(cell), cell, self.death_of(cell))

    def pairs(self) -> list[BirthDeathPair]:
        return extract_pairs(self)

    def pair_class(self, pair: BirthDeathPair) -> PairClass:
        if pair.death is None:
            return "essential"
        if self.values[pair.birth] == self.values[pair.death]:
            return "diagonal"
        return "off-diagonal"

    def persistence(self, pair: BirthDeathPair) -> float:
        if pair.death is None:
            return float("inf")
        return self.values[pair.death] - self.values[pair.birth]


def build_state(X: LefschetzComplex, h: DiscreteMorseFunction | Mapping[CellId, float]) -> ReducedState:
    """Reduce every boundary and coboundary matrix of X in the h-order."""
    values = h.as_dict() if isinstance(h, DiscreteMorseFunction) else dict(h)
    dmf = DiscreteMorseFunction(values)
    state = ReducedState(X, {c: values[c] for c in X}, {})
    for k in range(X.max_dim + 1):
        state.orders[k] = sorted(X.cells_of_dim(k), key=lambda c: (values[c], c))
    for k in range(X.max_dim + 1):
        state.boundary[k] = lazy_reduce(boundary_matrix(X, dmf, k))
        state.coboundary[k] = lazy_reduce(coboundary_matrix(X, dmf, k))
    logger.debug(f"Reduced state built over {len(X)} cells")
    return state


def extract_pairs(state: ReducedState) -> list[BirthDeathPair]:
    """
    Pairing by lows of R, cross-checked against the lows of R⊥. Cells of
    dimension n that are neither paired nor deaths are essential generators.

    Raises:
        PairingMismatchError: primal and dual pairings disagree
    """
    pairs: list[BirthDeathPair] = []
    paired: set = set()
    for n in sorted(state.orders):
        primal = state.boundary.get(n + 1)
        dual = state.coboundary.get(n)
        primal_pairs = {(b, d) for b, d in primal.pivots.items()} if primal else set()
        dual_pairs = {(b, d) for d, b in dual.pivots.items()} if dual else set()
        if primal_pairs != dual_pairs:
            mismatch = sorted(primal_pairs ^ dual_pairs)
            raise PairingMismatchError(
                f"Primal and dual pairings disagree in dimension {n}",
                cells=[c for pair in mismatch for c in pair],
            )
        for b, d in primal_pairs:
            pairs.append(BirthDeathPair(n, b, d))
            paired.update((b, d))
    for n, order in state.orders.items():
        for cell in order:
            if cell not in paired:
                pairs.append(BirthDeathPair(n, cell, None))
    pairs.sort(key=lambda p: (p.dim, state.values[p.birth], p.birth))
    return pairs


def relation(state: ReducedState, x: CellId, y: CellId, kind: RelationKind) -> bool:
    """x →× y iff U[x,y] = 1, x →∘ y iff U⊥[x,y] = 1 (x ≠ y, same dimension)."""
    if x == y or state.dim(x) != state.dim(y):
        return False
    n = state.dim(x)
    triple = state.boundary[n] if kind == "hom" else state.coboundary[n]
    return bool(triple.U.get(x, y))


def relation_graph(state: ReducedState) -> RelationGraph:
    hom = set()
    cohom = set()
    for triples, target in ((state.boundary, hom), (state.coboundary, cohom)):
        for triple in triples.values():
            for x, y in triple.U.entries():
                if x != y:
                    target.add((x, y))
    return RelationGraph(frozenset(hom), frozenset(cohom))


def incoming_relations(state: ReducedState, pair: BirthDeathPair) -> list[tuple[CellId, RelationKind]]:
    """
    Sources of same-dimension relations into a pair: deaths x with
    U[x, d_α] = 1 and births x with U⊥[x, b_α] = 1.
    """
    sources: list[tuple[CellId, RelationKind]] = []
    if pair.death is not None:
        U = state.boundary[pair.dim + 1].U
        sources += [(x, "hom") for x in U.sorted_column(pair.death) if x != pair.death]
    U_perp = state.coboundary[pair.dim].U
    sources += [(x, "cohom") for x in U_perp.sorted_column(pair.birth) if x != pair.birth]
    return sources


def pair_relations(state: ReducedState) -> list[tuple[BirthDeathPair, BirthDeathPair, RelationKind]]:
    """Pair-level relations β → α over all pairs of the state."""
    result = []
    for alpha in state.pairs():
        for source, kind in incoming_relations(state, alpha):
            result.append((state.pair_of(source), alpha, kind))
    return result


def check_relations(state: ReducedState) -> None:
    """
    Every relation β → α points up and to the left of α in the diagram,
    h(b_β) > h(b_α) and h(d_β) < h(d_α), and its source is a death (→×) or a
    birth (→∘).

    Raises:
        InvariantViolationError: naming the first offending relation
    """
    v = state.values
    for alpha in state.pairs():
        d_alpha = v[alpha.death] if alpha.death is not None else float("inf")
        for source, kind in incoming_relations(state, alpha):
            if not (state.is_death(source) if kind == "hom" else state.is_birth(source)):
                raise InvariantViolationError(
                    f"Source {source} of a {kind} relation into {alpha} is not a {'death' if kind == 'hom' else 'birth'}",
                    cells=[source, *alpha.cells],
                )
            beta = state.pair_of(source)
            if not (v[beta.birth] > v[alpha.birth] and v[beta.death] < d_alpha):
                raise InvariantViolationError(
                    f"Relation {beta} → {alpha} ({kind}) does not point up and to the left",
                    cells=[*beta.cells, *alpha.cells],
                )


def check_incoming_shrink(before: set, state: ReducedState, pair: BirthDeathPair) -> None:
    """
    After a transposition that kept the pairing and moved the pair toward the
    diagonal, its incoming relations are among those it had before.

    Raises:
        InvariantViolationError: a new relation appeared
    """
    new = set(incoming_relations(state, pair)) - before
    if new:
        raise InvariantViolationError(
            f"Relations {sorted(new)} into {pair} appeared along a move toward the diagonal",
            cells=sorted(c for c, _ in new),
        )


def is_shallow(pair: BirthDeathPair, state: ReducedState) -> bool:
    """
    Diagonal pairs are shallow; essential generators never are (they have no
    death to cancel against). Otherwise: no incoming relation at all.
    """
    if pair.death is None:
        return False
    if state.pair_class(pair) == "diagonal":
        return True
    return not incoming_relations(state, pair)


def is_critical_shallow(pair: BirthDeathPair, state: ReducedState) -> bool:
    """Off-diagonal pair whose incoming relations all come from vectors."""
    if pair.death is None or state.pair_class(pair) != "off-diagonal":
        return False
    for source, _ in incoming_relations(state, pair):
        if state.pair_class(state.pair_of(source)) != "diagonal":
            return False
    return True


def obstacle_count(state: ReducedState, pair: BirthDeathPair, pairs: Optional[list[BirthDeathPair]] = None) -> int:
    """
    Pairs other than α lying in [h(b),h(d)] x R or [-inf,h(b)] x [-inf,h(d)],
    counting essential generators at death = +inf.
    """
    if pair.death is None:
        return 0
    b, d = state.values[pair.birth], state.values[pair.death]
    count = 0
    for other in pairs if pairs is not None else state.pairs():
        if other == pair or state.pair_class(other) == "diagonal":
            continue
        ob = state.values[other.birth]
        od = state.values[other.death] if other.death is not None else float("inf")
        if b <= ob <= d or (ob <= b and od <= d):
            count += 1
    return count


def lefschetz_cancel(X: LefschetzComplex, pair: tuple[CellId, CellId]) -> QuotientComplex:
    """
    Quotient by a facet–cofacet pair (s, t):
    D̂(x,y) = D(x,y) + D(s,y)·D(x,t), with s and t removed.
    """
    s, t = pair
    if s not in X or t not in X or not X.coefficient(s, t):
        raise SimplificationError(f"{s} is not a facet of {t}", cells=[s, t])
    t_facets = X.facets(t)
    facets = {}
    for y in X:
        if y in (s, t):
            continue
        fs = X.facets(y)
        if s in fs:
            fs = fs ^ t_facets
        facets[y] = fs - {s, t}
    dims = {c: X.dim(c) for c in X if c not in (s, t)}
    return QuotientComplex(X, (s, t), LefschetzComplex(dims, facets))


def cancel_in_matrix(D: Z2SparseMatrix, s: CellId, t: CellId) -> Z2SparseMatrix:
    """B̂[:,y] = D[:,y] + D[s,y]·D[:,t], with row s and column t erased."""
    result = D.copy()
    for y in D.row(s):
        if y != t:
            result.add_column(y, t)
    result.remove_col(t)
    result.remove_row(s)
    return result


def _restricted_triple(D_hat: Z2SparseMatrix, triple: ReductionTriple, removed: set) -> ReductionTriple:
    U = triple.U.copy()
    V = triple.V.copy()
    for cell in removed:
        if U.has_col(cell):
            U.remove_row(cell)
            U.remove_col(cell)
            V.remove_row(cell)
            V.remove_col(cell)
    result = ReductionTriple(D_hat, D_hat @ V, U, V)
    result.refresh_pivots()
    return result


def quotient_state(state: ReducedState, pair: BirthDeathPair) -> ReducedState:
    """
    Reduced state of the Lefschetz quotient by a shallow pair: U, U⊥, V, V⊥
    restricted off the pair, R̂ = D̂·V̂ recomputed.

    Raises:
        NotShallowError: the pair has incoming relations
    """
    if pair.death is None or not is_shallow(pair, state):
        raise NotShallowError(f"Pair {pair} is not shallow", cells=list(pair.cells))
    b, d = pair.birth, pair.death
    removed = {b, d}
    quotient = lefschetz_cancel(state.complex, (b, d)).complex
    values = {c: v for c, v in state.values.items() if c not in removed}
    orders = {k: [c for c in order if c not in removed] for k, order in state.orders.items()}
    result = ReducedState(quotient, values, orders)
    for k in state.orders:
        rows = orders.get(k - 1, [])
        D_hat = Z2SparseMatrix(rows, orders[k], {y: quotient.facets(y) for y in orders[k]})
        result.boundary[k] = _restricted_triple(D_hat, state.boundary[k], removed)
        up = list(reversed(orders.get(k + 1, [])))
        cols = list(reversed(orders[k]))
        D_perp = Z2SparseMatrix(up, cols, {x: quotient.cofacets(x) for x in cols})
        result.coboundary[k] = _restricted_triple(D_perp, state.coboundary[k], removed)
    for triple in list(result.boundary.values()) + list(result.coboundary.values()):
        if not _is_reduced(triple):
            raise InvariantViolationError(f"Quotient by {pair} is not reduced", cells=[b, d])
    return result


def _is_reduced(triple: ReductionTriple) -> bool:
    return len(triple.pivots) == len(triple.lows)


def _shallow_in_matrix(triple: ReductionTriple, dual: ReductionTriple, b: CellId, d: CellId) -> bool:
    return triple.U.column(d) == {d} and dual.U.column(b) == {b}


def clear_quadrant(
    state: ReducedState,
    alpha: BirthDeathPair,
    beta: Optional[BirthDeathPair],
    n: int,
    strategy: Literal["persistence", "latest"] = "persistence",
) -> Z2SparseMatrix:
    """
    D^{α,β}: cancel, one at a time, the currently shallow pairs of D_{n+1}
    lying strictly in the bottom-right quadrant of α or of β (each quadrant
    excluding the other pair) until none remain.

    Raises:
        QuadrantClearingError: pairs remain in the quadrants but none is shallow
    """
    D = state.boundary[n + 1].D.copy()
    anchors = [p for p in (alpha, beta) if p is not None]
    for anchor in anchors:
        if anchor.death is None or anchor.dim != n:
            raise SimplificationError(f"Pair {anchor} is not a finite pair of dimension {n}", cells=list(anchor.cells))
    exclude = {p.birth for p in anchors}

    def in_quadrant(b: CellId, d: CellId, anchor: BirthDeathPair) -> bool:
        return (
            state.values[b] > state.values[anchor.birth]
            and state.values[d] < state.values[anchor.death]
        )

    cancelled = 0
    while True:
        triple = lazy_reduce(D)
        dual = lazy_reduce(D.antitranspose())
        candidates = [
            (b, d) for b, d in triple.pivots.items()
            if b not in exclude and any(in_quadrant(b, d, a) for a in anchors)
        ]
        if not candidates:
            break
        shallow = [(b, d) for b, d in candidates if _shallow_in_matrix(triple, dual, b, d)]
        if not shallow:
            raise QuadrantClearingError(
                f"No shallow pair left among {len(candidates)} quadrant pairs",
                cells=[c for pair in candidates for c in pair],
            )
        if strategy == "latest":
            b, d = max(shallow, key=lambda p: (state.values[p[1]], p[1]))
        else:
            b, d = min(shallow, key=lambda p: (state.values[p[1]] - state.values[p[0]], state.values[p[0]], p[0]))
        D = cancel_in_matrix(D, b, d)
        cancelled += 1
    logger.debug(f"clear_quadrant({alpha}, {beta}) cancelled {cancelled} pairs")
    return D
