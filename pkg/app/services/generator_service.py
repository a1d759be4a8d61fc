"""
Generator Service
=================

Description: Full simplices, random complexes and random dMfs
Version: 1.0.0

Generators: full simplices, random simplicial complexes and random
discrete Morse functions built along random linear extensions of the face
poset.
"""

import logging
from itertools import combinations
from typing import Iterable

import numpy as np

from app.config import SIMPLEX_MAX_DIM
from app.exceptions import BudgetExceededError, ValidationFailed
from app.models.diagram import PairEntry
from app.services.complex_service import CellId, DiscreteMorseFunction, LefschetzComplex
from app.services.pairing_service import build_state

logger = logging.getLogger(__name__)


def simplex_id(vertices: Iterable[int]) -> CellId:
    return "-".join(str(v) for v in sorted(vertices))


def _closure(simplices: Iterable[tuple[int, ...]]) -> LefschetzComplex:
    faces: set[tuple[int, ...]] = set()
    for simplex in simplices:
        for k in range(1, len(simplex) + 1):
            faces.update(combinations(sorted(simplex), k))
    dims = {simplex_id(f): len(f) - 1 for f in faces}
    facets = {
        simplex_id(f): [simplex_id(g) for g in combinations(f, len(f) - 1)] if len(f) > 1 else []
        for f in faces
    }
    return LefschetzComplex(dims, facets)


def simplex_skeleton(d: int) -> LefschetzComplex:
    """
    Full d-simplex on vertices 0..d: 2^(d+1) - 1 cells with ids like "0-1-2".

    Raises:
        BudgetExceededError: d above SIMPLEX_MAX_DIM
    """
    if d < 0:
        raise ValidationFailed(f"Simplex dimension must be non negative, got {d}")
    if d > SIMPLEX_MAX_DIM:
        raise BudgetExceededError(f"Simplex dimension {d} exceeds the budget {SIMPLEX_MAX_DIM}")
    X = _closure([tuple(range(d + 1))])
    logger.debug(f"simplex_skeleton({d}): {len(X)} cells")
    return X


def random_complex(seed: int, vertices: int = 6, max_dim: int = 2, maximal: int = 5) -> LefschetzComplex:
    """Closure of `maximal` random simplices of dimension at most max_dim."""
    rng = np.random.default_rng(seed)
    top = min(max_dim, vertices - 1)
    simplices = [(v,) for v in range(vertices)]
    for _ in range(maximal):
        size = int(rng.integers(1, top + 2))
        simplices.append(tuple(int(v) for v in rng.choice(vertices, size=size, replace=False)))
    return _closure(simplices)


def _linear_extension(X: LefschetzComplex, rng: np.random.Generator) -> list[CellId]:
    """Kahn's algorithm picking a uniformly random ready cell at every step."""
    missing = {c: sum(1 for f in X.facets(c) if f in X) for c in X}
    ready = sorted(c for c, n in missing.items() if n == 0)
    order: list[CellId] = []
    while ready:
        i = int(rng.integers(len(ready)))
        ready[i], ready[-1] = ready[-1], ready[i]
        cell = ready.pop()
        order.append(cell)
        for cofacet in sorted(X.cofacets(cell)):
            missing[cofacet] -= 1
            if missing[cofacet] == 0:
                ready.append(cofacet)
    return order


def _banded_order(X: LefschetzComplex, rng: np.random.Generator) -> list[CellId]:
    """
    Dimension by dimension; inside every band the negative cells precede the
    positive ones, so deaths of (k-1)-pairs come before births of k-pairs.
    """
    bands = {k: [X.cells_of_dim(k)[i] for i in rng.permutation(len(X.cells_of_dim(k)))]
             for k in range(X.max_dim + 1)}
    order = [c for k in sorted(bands) for c in bands[k]]
    state = build_state(X, {c: float(i) for i, c in enumerate(order)})
    result: list[CellId] = []
    for k in sorted(bands):
        result += [c for c in bands[k] if state.is_death(c)]
        result += [c for c in bands[k] if not state.is_death(c)]
    return result


def _add_vectors(X: LefschetzComplex, values: dict[CellId, float], rng: np.random.Generator, rate: float) -> int:
    """
    Tie facet x to cofacet y by raising h(x) to h(y), only when every other
    cofacet of x lies above y and neither cell is tied yet.
    """
    tied: set[CellId] = set()
    for y in sorted(X, key=values.__getitem__):
        if y in tied or rng.random() >= rate:
            continue
        candidates = sorted(
            x for x in X.facets(y)
            if x in X and x not in tied
            and all(values[z] > values[y] for z in X.cofacets(x) if z != y)
        )
        if not candidates:
            continue
        x = candidates[int(rng.integers(len(candidates)))]
        values[x] = values[y]
        tied.update((x, y))
    return len(tied) // 2


def random_dmf(X: LefschetzComplex, seed: int, banded: bool = False, vector_rate: float = 0.0) -> DiscreteMorseFunction:
    """
    Deterministic in `seed`. Values are the positions 0, 1, 2, ... of a random
    linear extension of the face poset; with `vector_rate` > 0 some
    facet/cofacet pairs are tied, producing a non-trivial gradient field.
    """
    rng = np.random.default_rng(seed)
    order = _banded_order(X, rng) if banded else _linear_extension(X, rng)
    values = {c: float(i) for i, c in enumerate(order)}
    vectors = _add_vectors(X, values, rng, vector_rate) if vector_rate > 0 else 0
    logger.debug(f"random_dmf(seed={seed}, banded={banded}): {len(values)} values, {vectors} vectors")
    return DiscreteMorseFunction(values)


def bands_separated(entries: Iterable[PairEntry]) -> bool:
    """
    True when, for every n, the value hull of the off-diagonal pairs of
    dimension n lies strictly below the hull of dimension n + 1.
    """
    hulls: dict[int, tuple[float, float]] = {}
    for e in entries:
        if e.pair_class != "off-diagonal":
            continue
        lo, hi = hulls.get(e.dim, (e.birth_value, e.death_value))
        hulls[e.dim] = (min(lo, e.birth_value), max(hi, e.death_value))
    dims = sorted(hulls)
    return all(
        hulls[a][1] < hulls[b][0]
        for a, b in zip(dims, dims[1:])
        if b == a + 1
    )
