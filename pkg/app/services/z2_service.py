"""
Z2 Service
==========

Description: Sparse Z2 matrices and the lazy reduction
Version: 1.0.0

Sparse Z2 matrices and the lazy reduction D = R·U with V = U⁻¹.

Rows and columns are keyed by cell id; the governing orders are kept as
separate permutations so that transpositions never relabel entries.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from app.services.complex_service import CellId, DiscreteMorseFunction, LefschetzComplex, h_order

logger = logging.getLogger(__name__)


class Z2SparseMatrix:
    """
    Column-major set storage plus a row index. Column and row additions are
    symmetric differences of id sets.
    """

    __slots__ = ("_row_order", "_col_order", "_row_pos", "_col_pos", "_cols", "_rows")

    def __init__(
        self,
        row_order: Sequence[CellId],
        col_order: Sequence[CellId],
        columns: Optional[Mapping[CellId, Iterable[CellId]]] = None,
    ):
        self._row_order = list(row_order)
        self._col_order = list(col_order)
        self._row_pos = {r: i for i, r in enumerate(self._row_order)}
        self._col_pos = {c: i for i, c in enumerate(self._col_order)}
        self._cols: dict[CellId, set] = {c: set() for c in self._col_order}
        self._rows: dict[CellId, set] = {r: set() for r in self._row_order}
        for c, rows in (columns or {}).items():
            for r in rows:
                self.toggle(r, c)

    @classmethod
    def identity(cls, order: Sequence[CellId]) -> "Z2SparseMatrix":
        return cls(order, order, {c: (c,) for c in order})

    def copy(self) -> "Z2SparseMatrix":
        clone = Z2SparseMatrix.__new__(Z2SparseMatrix)
        clone._row_order = list(self._row_order)
        clone._col_order = list(self._col_order)
        clone._row_pos = dict(self._row_pos)
        clone._col_pos = dict(self._col_pos)
        clone._cols = {c: set(rows) for c, rows in self._cols.items()}
        clone._rows = {r: set(cols) for r, cols in self._rows.items()}
        return clone

    @property
    def row_order(self) -> tuple[CellId, ...]:
        return tuple(self._row_order)

    @property
    def col_order(self) -> tuple[CellId, ...]:
        return tuple(self._col_order)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self._row_order), len(self._col_order)

    def row_position(self, row: CellId) -> int:
        return self._row_pos[row]

    def col_position(self, col: CellId) -> int:
        return self._col_pos[col]

    def has_row(self, row: CellId) -> bool:
        return row in self._row_pos

    def has_col(self, col: CellId) -> bool:
        return col in self._col_pos

    def get(self, row: CellId, col: CellId) -> int:
        return 1 if row in self._cols[col] else 0

    def toggle(self, row: CellId, col: CellId) -> None:
        column = self._cols[col]
        if row in column:
            column.discard(row)
            self._rows[row].discard(col)
        else:
            column.add(row)
            self._rows[row].add(col)

    def column(self, col: CellId) -> frozenset:
        return frozenset(self._cols[col])

    def row(self, row: CellId) -> frozenset:
        return frozenset(self._rows[row])

    def sorted_column(self, col: CellId) -> list[CellId]:
        return sorted(self._cols[col], key=self._row_pos.__getitem__)

    def is_zero_column(self, col: CellId) -> bool:
        return not self._cols[col]

    def add_column(self, target: CellId, source: CellId) -> None:
        """column[target] += column[source]"""
        for r in list(self._cols[source]):
            self.toggle(r, target)

    def add_row(self, target: CellId, source: CellId) -> None:
        """row[target] += row[source]"""
        for c in list(self._rows[source]):
            self.toggle(target, c)

    def low(self, col: CellId) -> Optional[CellId]:
        column = self._cols[col]
        if not column:
            return None
        return max(column, key=self._row_pos.__getitem__)

    def swap_rows(self, a: CellId, b: CellId) -> None:
        i, j = self._row_pos[a], self._row_pos[b]
        self._row_order[i], self._row_order[j] = b, a
        self._row_pos[a], self._row_pos[b] = j, i

    def swap_cols(self, a: CellId, b: CellId) -> None:
        i, j = self._col_pos[a], self._col_pos[b]
        self._col_order[i], self._col_order[j] = b, a
        self._col_pos[a], self._col_pos[b] = j, i

    def remove_row(self, row: CellId) -> None:
        for c in self._rows.pop(row):
            self._cols[c].discard(row)
        self._row_order.remove(row)
        self._row_pos = {r: i for i, r in enumerate(self._row_order)}

    def remove_col(self, col: CellId) -> None:
        for r in self._cols.pop(col):
            self._rows[r].discard(col)
        self._col_order.remove(col)
        self._col_pos = {c: i for i, c in enumerate(self._col_order)}

    def entries(self) -> frozenset:
        return frozenset((r, c) for c, rows in self._cols.items() for r in rows)

    def nnz(self) -> int:
        return sum(len(rows) for rows in self._cols.values())

    def antitranspose(self) -> "Z2SparseMatrix":
        """Transpose with both orders reversed: D⊥_n from D_{n+1}."""
        return Z2SparseMatrix(
            list(reversed(self._col_order)),
            list(reversed(self._row_order)),
            {r: cols for r, cols in self._rows.items()},
        )

    def __matmul__(self, other: "Z2SparseMatrix") -> "Z2SparseMatrix":
        result = Z2SparseMatrix(self._row_order, other._col_order)
        for c in other._col_order:
            acc: set = set()
            for k in other._cols[c]:
                acc ^= self._cols[k]
            for r in acc:
                result.toggle(r, c)
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Z2SparseMatrix):
            return NotImplemented
        return (
            self._row_order == other._row_order
            and self._col_order == other._col_order
            and self._cols == other._cols
        )

    def __repr__(self) -> str:
        rows, cols = self.shape
        return f"Z2SparseMatrix({rows}x{cols}, nnz={self.nnz()})"

    def is_upper_unitriangular(self) -> bool:
        """Square matrix over one order with unit diagonal and no entry below it."""
        if self._row_order != self._col_order:
            return False
        for c, rows in self._cols.items():
            if c not in rows:
                return False
            pos = self._col_pos[c]
            if any(self._row_pos[r] > pos for r in rows):
                return False
        return True


@dataclass
class ReductionTriple:
    """
    D = R·U with R reduced and V = U⁻¹ (R = D·V).

    `pivots` maps a low row to the column owning it, `lows` the converse.
    """
    D: Z2SparseMatrix
    R: Z2SparseMatrix
    U: Z2SparseMatrix
    V: Z2SparseMatrix
    pivots: dict = field(default_factory=dict)
    lows: dict = field(default_factory=dict)

    def copy(self) -> "ReductionTriple":
        return ReductionTriple(
            self.D.copy(), self.R.copy(), self.U.copy(), self.V.copy(),
            dict(self.pivots), dict(self.lows),
        )

    def refresh_pivots(self) -> None:
        self.lows = {}
        self.pivots = {}
        for c in self.R.col_order:
            r = self.R.low(c)
            if r is not None:
                self.lows[c] = r
                self.pivots[r] = c

    def owner(self, row: CellId) -> Optional[CellId]:
        return self.pivots.get(row)


OrderLike = Union[DiscreteMorseFunction, Sequence[CellId]]


def _as_order(X: LefschetzComplex, h: OrderLike) -> list[CellId]:
    if isinstance(h, DiscreteMorseFunction):
        return h_order(X, h)
    return list(h)


def boundary_matrix(X: LefschetzComplex, h: OrderLike, n: int) -> Z2SparseMatrix:
    """D_n: rows (n-1)-cells, columns n-cells, both in h-order."""
    order = _as_order(X, h)
    rows = [c for c in order if X.dim(c) == n - 1]
    cols = [c for c in order if X.dim(c) == n]
    row_set = set(rows)
    return Z2SparseMatrix(rows, cols, {y: [x for x in X.facets(y) if x in row_set] for y in cols})


def coboundary_matrix(X: LefschetzComplex, h: OrderLike, n: int) -> Z2SparseMatrix:
    """D⊥_n: rows (n+1)-cells, columns n-cells, both in reversed h-order."""
    order = _as_order(X, h)
    rows = [c for c in reversed(order) if X.dim(c) == n + 1]
    cols = [c for c in reversed(order) if X.dim(c) == n]
    return Z2SparseMatrix(rows, cols, {x: X.cofacets(x) for x in cols})


def low(matrix: Z2SparseMatrix, column: CellId) -> Optional[CellId]:
    """Last row in row order with a nonzero entry in the column."""
    return matrix.low(column)


def lazy_reduce(D: Z2SparseMatrix) -> ReductionTriple:
    """
    Left-to-right column reduction. A low conflict with a preceding column x
    adds R[:,x] into the current column y, applies the row update
    U[x,:] += U[y,:] and the mirrored column update V[:,y] += V[:,x].
    """
    R = D.copy()
    order = D.col_order
    U = Z2SparseMatrix.identity(order)
    V = Z2SparseMatrix.identity(order)
    pivots: dict = {}
    lows: dict = {}
    for y in order:
        r = R.low(y)
        while r is not None and r in pivots:
            x = pivots[r]
            R.add_column(y, x)
            U.add_row(x, y)
            V.add_column(y, x)
            r = R.low(y)
        if r is not None:
            pivots[r] = y
            lows[y] = r
    return ReductionTriple(D.copy(), R, U, V, pivots, lows)


def reduce_column(triple: ReductionTriple, y: CellId) -> bool:
    """
    Reduce column y again from D[:,y] against the columns before it, leaving
    every other column alone. Returns whether R[:,y] or V[:,y] changed.
    """
    D, R, U, V = triple.D, triple.R, triple.U, triple.V
    old_r, old_v = R.column(y), V.column(y)
    r = triple.lows.pop(y, None)
    if r is not None and triple.pivots.get(r) == y:
        del triple.pivots[r]
    for row in old_r ^ D.column(y):
        R.toggle(row, y)
    for x in U.column(y) - {y}:
        U.toggle(x, y)
    for x in old_v - {y}:
        V.toggle(x, y)

    pos = D.col_position(y)
    r = R.low(y)
    while r is not None:
        x = triple.pivots.get(r)
        if x is None or D.col_position(x) >= pos:
            break
        R.add_column(y, x)
        U.toggle(x, y)
        V.add_column(y, x)
        r = R.low(y)
    if r is not None:
        triple.pivots[r] = y
        triple.lows[y] = r
    return R.column(y) != old_r or V.column(y) != old_v


def swap_columns(triple: ReductionTriple, p: CellId, q: CellId) -> list[CellId]:
    """
    Exchange the adjacent columns p (first) and q, keeping the triple equal to
    the lazy reduction of the swapped D.

    With U[p,q] = 0 only the orders move. Otherwise q and p are reduced again
    in their new order, then every later column whose chain added a column
    that was rewritten. Lows of the later columns never move, so nothing else
    needs touching. Returns the columns reduced again.
    """
    related = triple.U.get(p, q)
    for matrix in (triple.D, triple.R):
        matrix.swap_cols(p, q)
    for matrix in (triple.U, triple.V):
        matrix.swap_cols(p, q)
        matrix.swap_rows(p, q)
    if not related:
        return []

    for c in (p, q):
        r = triple.lows.pop(c, None)
        if r is not None:
            del triple.pivots[r]
    changed = {p, q}
    rerun = []
    order = triple.D.col_order
    for y in order[triple.D.col_position(q):]:
        if y not in changed and not triple.U.column(y) & changed:
            continue
        rerun.append(y)
        if reduce_column(triple, y):
            changed.add(y)
    return rerun


def verify_decomposition(D: Z2SparseMatrix, triple: ReductionTriple) -> bool:
    """D = R·U, R reduced, U unit upper triangular."""
    if not triple.U.is_upper_unitriangular():
        return False
    seen = set()
    for c in triple.R.col_order:
        r = triple.R.low(c)
        if r is None:
            continue
        if r in seen:
            return False
        seen.add(r)
    return (triple.R @ triple.U) == D
