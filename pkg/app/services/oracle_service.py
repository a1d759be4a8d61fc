"""
Oracle Service
==============

Description: Dense reference reductions, paths and regions
Version: 1.0.0

Brute-force reference implementations.

Nothing here reuses the sparse matrix code of the engine: reductions run on
dense numpy bit arrays, paths are enumerated by explicit DFS and regions are
evaluated from their definition.
"""

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from app.config import ORACLE_MAX_CELLS, ORACLE_PATH_MAX_CELLS
from app.exceptions import OracleScaleExceeded
from app.services.complex_service import CellId, DiscreteMorseFunction, LefschetzComplex
from app.services.morse_state import MorseState
from app.services.pairing_service import BirthDeathPair, ReducedState
from app.services.vector_field_service import CombinatorialVectorField

logger = logging.getLogger(__name__)


@dataclass
class DenseReduction:
    rows: list
    cols: list
    R: np.ndarray
    U: np.ndarray
    V: np.ndarray
    lows: dict

    def entries(self, matrix: str) -> set:
        array = getattr(self, matrix)
        index = self.rows if matrix == "R" else self.cols
        return {(index[i], self.cols[j]) for i, j in zip(*np.nonzero(array))}


@dataclass
class OracleState:
    pairs: set
    boundary: dict = field(default_factory=dict)
    coboundary: dict = field(default_factory=dict)


def _reduce(rows: list, cols: list, D: np.ndarray) -> DenseReduction:
    R = D.copy()
    n = len(cols)
    U = np.eye(n, dtype=np.uint8)
    V = np.eye(n, dtype=np.uint8)
    owner: dict[int, int] = {}
    for j in range(n):
        while True:
            nz = np.flatnonzero(R[:, j])
            if nz.size == 0 or nz[-1] not in owner:
                break
            i = owner[nz[-1]]
            R[:, j] ^= R[:, i]
            U[i, :] ^= U[j, :]
            V[:, j] ^= V[:, i]
        if nz.size:
            owner[nz[-1]] = j
    lows = {cols[j]: rows[r] for r, j in owner.items()}
    return DenseReduction(rows, cols, R, U, V, lows)


def _dense(X: LefschetzComplex, rows: list, cols: list) -> np.ndarray:
    D = np.zeros((len(rows), len(cols)), dtype=np.uint8)
    index = {r: i for i, r in enumerate(rows)}
    for j, y in enumerate(cols):
        for x in X.facets(y):
            if x in index:
                D[index[x], j] = 1
    return D


def brute_reduce(X: LefschetzComplex, h: DiscreteMorseFunction | Mapping[CellId, float]) -> OracleState:
    """
    Primal and dual lazy reduction of every dimension from scratch.

    Raises:
        OracleScaleExceeded: more cells than the dense budget
    """
    if len(X) > ORACLE_MAX_CELLS:
        raise OracleScaleExceeded(f"oracle scale exceeded: {len(X)} cells > {ORACLE_MAX_CELLS}")
    values = h.as_dict() if isinstance(h, DiscreteMorseFunction) else dict(h)
    by_dim: dict[int, list] = {}
    for cell in sorted(X, key=lambda c: (values[c], c)):
        by_dim.setdefault(X.dim(cell), []).append(cell)

    state = OracleState(pairs=set())
    for k in range(X.max_dim + 1):
        rows, cols = by_dim.get(k - 1, []), by_dim.get(k, [])
        state.boundary[k] = _reduce(rows, cols, _dense(X, rows, cols))
        up = list(reversed(by_dim.get(k + 1, [])))
        down = list(reversed(cols))
        D_perp = _dense(X, down, up).T.copy() if up and down else np.zeros((len(up), len(down)), dtype=np.uint8)
        state.coboundary[k] = _reduce(up, down, D_perp)
    paired = set()
    for k, reduction in state.boundary.items():
        for death, birth in reduction.lows.items():
            state.pairs.add(BirthDeathPair(k - 1, birth, death))
            paired.update((birth, death))
    for k, cells in by_dim.items():
        state.pairs.update(BirthDeathPair(k, c) for c in cells if c not in paired)
    return state


@dataclass
class StateDiff:
    pairing: set = field(default_factory=set)
    entries: list = field(default_factory=list)
    values: list = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not (self.pairing or self.entries or self.values)

    def __bool__(self) -> bool:
        return not self.empty

    def summary(self) -> str:
        return f"{len(self.pairing)} pairing, {len(self.entries)} matrix, {len(self.values)} value differences"


def diff_states(state: ReducedState, oracle: OracleState, values: Mapping[CellId, float] | None = None) -> StateDiff:
    """Compare pairing, U, V, U⊥, V⊥ and (optionally) values against the oracle."""
    diff = StateDiff()
    diff.pairing = set(state.pairs()) ^ oracle.pairs
    for label, engine, dense in (("", state.boundary, oracle.boundary), ("perp", state.coboundary, oracle.coboundary)):
        for k in sorted(set(engine) | set(dense)):
            if k not in engine or k not in dense:
                # a dimension emptied by cancellations has no dense counterpart
                if k in engine and not engine[k].D.col_order:
                    continue
                diff.entries.append((f"D{label}_{k}", None, None))
                continue
            for matrix in ("U", "V"):
                ours = set(getattr(engine[k], matrix).entries())
                theirs = dense[k].entries(matrix)
                diff.entries += [(f"{matrix}{label}_{k}", r, c) for r, c in sorted(ours ^ theirs)]
    if values is not None:
        diff.values = sorted(c for c in state.values if state.values[c] != values.get(c))
    if diff:
        logger.warning(f"Oracle diff: {diff.summary()}")
    return diff


def _arcs(V: CombinatorialVectorField) -> dict[CellId, list[CellId]]:
    X = V.complex
    arcs: dict[CellId, list[CellId]] = {c: [] for c in X}
    for y in X:
        for x in X.facets(y):
            if x not in X:
                continue
            if V.partner(x) == y and X.dim(x) < X.dim(y):
                arcs[x].append(y)
            else:
                arcs[y].append(x)
    return arcs


def brute_paths(V: CombinatorialVectorField, y: CellId, x: CellId) -> list[tuple[CellId, ...]]:
    """
    Every path from y to x through cells of dimension dim x or dim x + 1.

    Raises:
        OracleScaleExceeded: complex larger than the enumeration budget
    """
    X = V.complex
    if len(X) > ORACLE_PATH_MAX_CELLS:
        raise OracleScaleExceeded(f"oracle scale exceeded: {len(X)} cells > {ORACLE_PATH_MAX_CELLS}")
    if y == x:
        return [(y,)]
    k = X.dim(x)
    band = {c for c in X if X.dim(c) in (k, k + 1)}
    if y not in band:
        return []
    arcs = _arcs(V)
    found: list[tuple[CellId, ...]] = []
    stack = [(y,)]
    while stack:
        path = stack.pop()
        for nxt in arcs[path[-1]]:
            if nxt not in band or nxt in path:
                continue
            if nxt == x:
                found.append(path + (nxt,))
            else:
                stack.append(path + (nxt,))
    return sorted(found)


def _reachable(arcs: dict, source: CellId) -> set:
    seen = set()
    stack = [source]
    while stack:
        for nxt in arcs[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


class BruteRegion:
    """Forbidden-region membership evaluated straight from the definition."""

    def __init__(self, state: MorseState, pair: BirthDeathPair):
        reduced = state.reduced
        h = reduced.values
        n = pair.dim
        arcs = _arcs(state.field)
        self._death_quadrants = []
        self._birth_quadrants = []
        U = reduced.boundary[n + 1].U
        for x in reduced.orders.get(n + 1, []):
            if x != pair.death and U.get(x, pair.death):
                beta = reduced.pair_of(x)
                self._death_quadrants.append((h[beta.birth], h[beta.death]))
        U_perp = reduced.coboundary[n].U
        for x in reduced.orders[n]:
            if x != pair.birth and U_perp.get(x, pair.birth):
                beta = reduced.pair_of(x)
                if beta.death is not None:
                    self._birth_quadrants.append((h[beta.birth], h[beta.death]))
        for x in _reachable(arcs, pair.death):
            if x in state.criticals and x not in pair.cells:
                self._death_quadrants.append((h[x], h[x]))
        for y in state.complex:
            if y in state.criticals and y not in pair.cells and pair.birth in _reachable(arcs, y):
                self._birth_quadrants.append((h[y], h[y]))

    def in_death_region(self, point: tuple[float, float]) -> bool:
        return any(point[0] <= a and point[1] <= b for a, b in self._death_quadrants)

    def in_birth_region(self, point: tuple[float, float]) -> bool:
        return any(point[0] >= c and point[1] >= d for c, d in self._birth_quadrants)

    def intersect(self) -> bool:
        return any(c <= a and d <= b for a, b in self._death_quadrants for c, d in self._birth_quadrants)


def brute_region(state: MorseState, pair: BirthDeathPair) -> BruteRegion:
    return BruteRegion(state, pair)
