"""
Transposition Service
=====================

Description: Adjacent transpositions of the reduced state
Version: 1.0.0

Incremental updates of the pairing and of U, V, U⊥, V⊥ under adjacent
transpositions of two same-dimension cells.

Swapping k-cells a < b touches four matrices: the columns of D_k and D⊥_k and
the rows of D_{k+1} and D⊥_{k-1}. Each matrix is updated locally:

* column swap (p before q): nothing changes unless U[p,q] = 1. Then the
  pairing switches, q and p are reduced again in their new order and so is
  every later column whose chain added one of the rewritten columns;
* row swap (r1 before r2, owned by columns P and Q when they are lows): the
  later-owned case with R[r1,Q] = 1 fires a row update U[P,:] += U[Q,:]
  (pairing kept, P before Q) or switches the pairing (Q before P); with Q
  before P and U[Q,P] = 1 the mirrored update fires without a switch. When r1
  is no low, R[r1,Q] = 1 hands r1 to Q and frees r2, with R, U and V kept.

V is updated by the mirrored column addition whenever U is.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Optional

from app.exceptions import (
    AdjacencyError,
    CriterionHypothesisError,
    InvariantViolationError,
    TranspositionPreconditionError,
)
from app.services.complex_service import CellId
from app.services.pairing_service import (
    BirthDeathPair,
    ReducedState,
    clear_quadrant,
    relation,
)
from app.services.z2_service import ReductionTriple, swap_columns

logger = logging.getLogger(__name__)


class TranspositionKind(str, Enum):
    DEATH_DEATH = "death-death"
    BIRTH_BIRTH = "birth-birth"
    MIXED = "birth-death mixed"
    VECTOR = "vector-involving"
    OTHER = "other"


@dataclass(frozen=True)
class TranspositionEvent:
    kind: TranspositionKind
    first: CellId
    second: CellId
    dim: int
    moving: Optional[BirthDeathPair] = None
    bystander: Optional[BirthDeathPair] = None


@dataclass
class UpdateOutcome:
    pairing_switched: bool = False
    rows_updated: set = field(default_factory=set)
    criterion_value: Optional[int] = None
    case: Optional[int] = None
    predicted_case: Optional[int] = None
    columns_reduced: list = field(default_factory=list)
    event: Optional[TranspositionEvent] = None

    @property
    def changed(self) -> bool:
        return self.pairing_switched or bool(self.rows_updated)

    def merge(self, other: "UpdateOutcome") -> None:
        self.pairing_switched |= other.pairing_switched
        self.rows_updated |= other.rows_updated
        self.columns_reduced += other.columns_reduced


def _swap_columns(triple: ReductionTriple, p: CellId, q: CellId, label: str, outcome: UpdateOutcome) -> None:
    D = triple.D
    if D.col_position(q) != D.col_position(p) + 1:
        raise AdjacencyError(f"Columns {p} and {q} are not adjacent in {label}", cells=[p, q])
    before = dict(triple.pivots)
    reduced = swap_columns(triple, p, q)
    if reduced:
        outcome.columns_reduced += [(label, y) for y in reduced]
        outcome.pairing_switched |= triple.pivots != before
        logger.debug(f"{label}: column swap {p}/{q} reduced {reduced} again")


def _row_update(triple: ReductionTriple, earlier: CellId, later: CellId, label: str, outcome: UpdateOutcome) -> None:
    """R[:,later] += R[:,earlier]; U[earlier,:] += U[later,:]; V[:,later] += V[:,earlier]."""
    triple.R.add_column(later, earlier)
    triple.U.add_row(earlier, later)
    triple.V.add_column(later, earlier)
    outcome.rows_updated.add((f"U{label}", earlier))
    outcome.rows_updated.add((f"V{label}", later))


def _swap_rows(triple: ReductionTriple, r1: CellId, r2: CellId, label: str, outcome: UpdateOutcome) -> None:
    D = triple.D
    if D.row_position(r2) != D.row_position(r1) + 1:
        raise AdjacencyError(f"Rows {r1} and {r2} are not adjacent in {label}", cells=[r1, r2])
    P = triple.pivots.get(r1)
    Q = triple.pivots.get(r2)
    if Q is not None:
        if P is None:
            if triple.R.get(r1, Q):
                del triple.pivots[r2]
                triple.pivots[r1] = Q
                triple.lows[Q] = r1
                outcome.pairing_switched = True
        elif D.col_position(P) < D.col_position(Q):
            if triple.R.get(r1, Q):
                _row_update(triple, P, Q, label, outcome)
        elif triple.R.get(r1, Q):
            _row_update(triple, Q, P, label, outcome)
            triple.pivots[r1], triple.pivots[r2] = Q, P
            triple.lows[Q], triple.lows[P] = r1, r2
            outcome.pairing_switched = True
        elif triple.U.get(Q, P):
            _row_update(triple, Q, P, label, outcome)
    triple.D.swap_rows(r1, r2)
    triple.R.swap_rows(r1, r2)


def transpose(state: ReducedState, first: CellId, second: CellId) -> UpdateOutcome:
    """
    Swap two k-cells adjacent in the k-order (first immediately before
    second), updating all four affected reductions, the order and the values.

    Raises:
        AdjacencyError: different dimensions or not adjacent
    """
    k = state.dim(first)
    if state.dim(second) != k:
        raise AdjacencyError(f"{first} and {second} have different dimensions", cells=[first, second])
    order = state.orders[k]
    D_k = state.boundary[k].D
    i = D_k.col_position(first)
    if D_k.col_position(second) != i + 1:
        raise AdjacencyError(f"{first} is not immediately before {second}", cells=[first, second])

    outcome = UpdateOutcome()
    _swap_columns(state.boundary[k], first, second, f"_{k}", outcome)
    if k + 1 in state.boundary:
        _swap_rows(state.boundary[k + 1], first, second, f"_{k + 1}", outcome)
    _swap_columns(state.coboundary[k], second, first, f"perp_{k}", outcome)
    if k - 1 in state.coboundary:
        _swap_rows(state.coboundary[k - 1], second, first, f"perp_{k - 1}", outcome)

    order[i], order[i + 1] = second, first
    state.values[first], state.values[second] = state.values[second], state.values[first]
    if outcome.changed:
        logger.debug(f"transpose({first}, {second}): switched={outcome.pairing_switched} rows={sorted(outcome.rows_updated)}")
    return outcome


def _require_finite(pair: BirthDeathPair) -> None:
    if pair.death is None:
        raise TranspositionPreconditionError(f"Pair {pair} has no death", cells=list(pair.cells))


def _adjacent(state: ReducedState, a: CellId, b: CellId) -> tuple[CellId, CellId]:
    D = state.boundary[state.dim(a)].D
    if state.dim(a) == state.dim(b):
        pa, pb = D.col_position(a), D.col_position(b)
        if abs(pa - pb) == 1:
            return (a, b) if pa < pb else (b, a)
    raise AdjacencyError(f"{a} and {b} are not adjacent", cells=[a, b])


def criterion_entry(
    state: ReducedState,
    alpha: BirthDeathPair,
    beta: BirthDeathPair,
    side: Literal["birth", "death"],
) -> int:
    """
    The quadrant-cleared entry read off the current reduction without any
    re-reduction.

    birth: h(d_β) < h(d_α), h(b_β) < h(b_α), births adjacent;
           returns R[b_β, d_α] = Σ_{V[x,d_α]=1} D[b_β, x].
    death: h(b_α) < h(b_β), h(d_α) < h(d_β), deaths adjacent;
           returns R⊥[d_β, b_α] = Σ_{V⊥[x,b_α]=1} D⊥[d_β, x].

    Raises:
        CriterionHypothesisError: configuration outside the fast path
    """
    _require_finite(alpha)
    _require_finite(beta)
    v = state.values
    n = alpha.dim
    if beta.dim != n:
        raise CriterionHypothesisError("Pairs of different dimensions", cells=[alpha.birth, beta.birth])
    if side == "birth":
        ok = v[beta.death] < v[alpha.death] and v[beta.birth] < v[alpha.birth]
        triple = state.boundary[n + 1]
        ok = ok and abs(triple.D.row_position(alpha.birth) - triple.D.row_position(beta.birth)) == 1
        row, col = beta.birth, alpha.death
    else:
        ok = v[alpha.birth] < v[beta.birth] and v[alpha.death] < v[beta.death]
        triple = state.coboundary[n]
        ok = ok and abs(triple.D.row_position(alpha.death) - triple.D.row_position(beta.death)) == 1
        row, col = beta.death, alpha.birth
    if not ok:
        raise CriterionHypothesisError(
            f"Fast criterion hypotheses fail for {alpha}, {beta} ({side})",
            cells=[alpha.birth, beta.birth],
        )
    return len(triple.V.column(col) & triple.D.row(row)) % 2


def quadrant_entry(state: ReducedState, alpha: BirthDeathPair, beta: BirthDeathPair, side: Literal["birth", "death"]) -> int:
    """D^{α,β}[b_β,d_α] (birth side) or D^{α,β}[b_α,d_β] (death side) by explicit clearing."""
    cleared = clear_quadrant(state, alpha, beta, alpha.dim)
    if side == "birth":
        return cleared.get(beta.birth, alpha.death)
    return cleared.get(alpha.birth, beta.death)


def _entry(state: ReducedState, alpha: BirthDeathPair, beta: BirthDeathPair, side) -> Optional[int]:
    """Outside the fast-path configuration the cleared entry only repeats an existing relation."""
    try:
        return criterion_entry(state, alpha, beta, side)
    except CriterionHypothesisError:
        return None


def transpose_deaths(state: ReducedState, alpha: BirthDeathPair, beta: BirthDeathPair) -> UpdateOutcome:
    """
    Swap the adjacent deaths of α and β, h(b_α) < h(b_β).

    case 2: β →× α, pairing switches; case 1: β →∘ α or D^{α,β}[b_α,d_β] = 1,
    U⊥ row b_β absorbs row b_α; case 3: nothing changes.
    """
    _require_finite(alpha)
    _require_finite(beta)
    if not state.values[alpha.birth] < state.values[beta.birth]:
        raise TranspositionPreconditionError(f"h(b_α) < h(b_β) fails for {alpha}, {beta}", cells=[alpha.birth, beta.birth])
    first, second = _adjacent(state, alpha.death, beta.death)
    hom = relation(state, beta.death, alpha.death, "hom")
    cohom = relation(state, beta.birth, alpha.birth, "cohom")
    entry = None if hom or cohom else _entry(state, alpha, beta, "death")
    predicted = 2 if hom else (1 if cohom or entry else 3)

    outcome = transpose(state, first, second)
    outcome.criterion_value = entry
    outcome.predicted_case = predicted
    outcome.case = 2 if outcome.pairing_switched else (1 if outcome.rows_updated else 3)
    outcome.event = TranspositionEvent(TranspositionKind.DEATH_DEATH, first, second, alpha.dim + 1, alpha, beta)
    _check_prediction(outcome)
    return outcome


def transpose_births(state: ReducedState, alpha: BirthDeathPair, beta: BirthDeathPair) -> UpdateOutcome:
    """
    Swap the adjacent births of α and β, h(d_β) < h(d_α).

    case 2: β →∘ α, pairing switches; case 1: β →× α or D^{α,β}[b_β,d_α] = 1,
    U row d_β absorbs row d_α; case 3: nothing changes.
    """
    _require_finite(alpha)
    _require_finite(beta)
    if not state.values[beta.death] < state.values[alpha.death]:
        raise TranspositionPreconditionError(f"h(d_β) < h(d_α) fails for {alpha}, {beta}", cells=[alpha.death, beta.death])
    first, second = _adjacent(state, alpha.birth, beta.birth)
    cohom = relation(state, beta.birth, alpha.birth, "cohom")
    hom = relation(state, beta.death, alpha.death, "hom")
    entry = None if hom or cohom else _entry(state, alpha, beta, "birth")
    predicted = 2 if cohom else (1 if hom or entry else 3)

    outcome = transpose(state, first, second)
    outcome.criterion_value = entry
    outcome.predicted_case = predicted
    outcome.case = 2 if outcome.pairing_switched else (1 if outcome.rows_updated else 3)
    outcome.event = TranspositionEvent(TranspositionKind.BIRTH_BIRTH, first, second, alpha.dim, alpha, beta)
    _check_prediction(outcome)
    return outcome


def _check_prediction(outcome: UpdateOutcome) -> None:
    if outcome.predicted_case != outcome.case:
        logger.warning(
            f"Transposition {outcome.event.first}/{outcome.event.second}: "
            f"predicted case {outcome.predicted_case}, applied case {outcome.case}"
        )


def transpose_mixed(state: ReducedState, event: TranspositionEvent) -> UpdateOutcome:
    """
    A birth (or essential cell) moving up past a death, equivalently a death
    moving down past a birth: `first` is the birth, `second` the death.

    Raises:
        TranspositionPreconditionError: the cells are not birth then death
        InvariantViolationError: the reduction changed
    """
    first, second = event.first, event.second
    if state.is_death(first) or not state.is_death(second):
        raise TranspositionPreconditionError(
            f"Mixed transposition needs a birth before a death, got {first}, {second}",
            cells=[first, second],
        )
    outcome = transpose(state, first, second)
    outcome.case = 3
    outcome.event = event
    if outcome.changed:
        raise InvariantViolationError(
            f"Mixed transposition {first}/{second} changed the reduction",
            cells=[first, second],
        )
    return outcome


def _critical_snapshot(state: ReducedState, criticals: set) -> tuple:
    """Pairs and relations with both ends critical."""
    pairs = frozenset(p for p in state.pairs() if set(p.cells) <= criticals)
    relations = []
    for triples in (state.boundary, state.coboundary):
        relations.append(frozenset(
            (x, y)
            for triple in triples.values()
            for x, y in triple.U.entries()
            if x != y and x in criticals and y in criticals
        ))
    return pairs, *relations


def transpose_with_vector(
    state: ReducedState,
    first_block: tuple[CellId, ...],
    second_block: tuple[CellId, ...],
    criticals: set,
) -> UpdateOutcome:
    """
    Exchange two blocks adjacent in the h-order, at least one of them a
    vector (two cells of one value). Same-dimension members are transposed,
    values are exchanged block-wise.

    Raises:
        TranspositionPreconditionError: neither block is a vector
        InvariantViolationError: critical pairing or critical relations changed
    """
    if len(first_block) < 2 and len(second_block) < 2:
        raise TranspositionPreconditionError("No vector in the transposition", cells=[*first_block, *second_block])
    before = _critical_snapshot(state, criticals)
    first_value = state.values[first_block[0]]
    second_value = state.values[second_block[0]]

    outcome = UpdateOutcome()
    for a in first_block:
        for b in second_block:
            if state.dim(a) == state.dim(b):
                outcome.merge(transpose(state, a, b))
    for a in first_block:
        state.values[a] = second_value
    for b in second_block:
        state.values[b] = first_value

    outcome.event = TranspositionEvent(TranspositionKind.VECTOR, first_block[0], second_block[0], state.dim(first_block[0]))
    if _critical_snapshot(state, criticals) != before:
        raise InvariantViolationError(
            "Transposition with a vector changed critical pairs or relations",
            cells=[*first_block, *second_block],
        )
    outcome.case = 3
    return outcome
