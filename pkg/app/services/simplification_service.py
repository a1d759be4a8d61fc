"""
Simplification Service
======================

Description: Allowed moves, journeys, reversals and the cancellation driver
Version: 1.0.0

Allowed moves, the journey of a pair to the diagonal, path reversal and the
cancellation driver.

A move relocates one endpoint of a pair together with the non-critical cells
glued to it by gradient paths, into an empty value interval past the next
critical cell. Moves never change the gradient field; whenever the moving
endpoint passes a critical cell of its own dimension the reduction of the
Morse complex is updated by one adjacent transposition.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

from app.config import VERIFY_DEFAULT
from app.exceptions import (
    IneligiblePairError,
    InvariantViolationError,
    JourneyBlockedError,
    MoveSpecError,
    NoGapError,
    NotReversibleError,
    OracleDiffError,
)
from app.models.diagram import PairEntry
from app.models.reports import CancellationReport, ClassificationReport, Policy
from app.services.complex_service import CellId, DiscreteMorseFunction, induced_partition, validate_dmf
from app.services.morse_state import MorseState
from app.services.oracle_service import brute_reduce, diff_states
from app.services.pairing_service import (
    BirthDeathPair,
    check_incoming_shrink,
    check_relations,
    incoming_relations,
    is_shallow,
    quotient_state,
    relation,
)
from app.services.region_service import eligible, forbidden_regions
from app.services.transposition_service import (
    TranspositionEvent,
    TranspositionKind,
    UpdateOutcome,
    transpose,
    transpose_births,
    transpose_deaths,
    transpose_mixed,
)
from app.services.vector_field_service import (
    GradientPath,
    find_path,
    induced_vector_field,
    morse_complex,
    partition_of,
    reverse_path,
)

logger = logging.getLogger(__name__)

Direction = Literal["right", "down"]
HOMOTOPY_SAMPLES = (0.25, 0.5, 0.75)


@dataclass(frozen=True)
class MoveSpec:
    """
    right: h(b) < δ < ξ < h(d), b is relocated into [δ, ξ];
    down:  h(b) < ξ < δ < h(d), d is relocated into [ξ, δ].
    `bypass` is the critical cell the endpoint passes, if any.
    """
    direction: Direction
    pair: BirthDeathPair
    delta: float
    xi: float
    bypass: Optional[CellId] = None


@dataclass
class MoveRecord:
    spec: MoveSpec
    outcome: Optional[UpdateOutcome]
    dmf: DiscreteMorseFunction


@dataclass
class SimplificationTrace:
    """Functions along a journey and its reversal. cancel_pair records them in dense ranks."""
    pair: BirthDeathPair
    start: DiscreteMorseFunction
    moves: list[MoveRecord] = field(default_factory=list)
    path: Optional[GradientPath] = None
    final: Optional[DiscreteMorseFunction] = None

    def functions(self) -> list[DiscreteMorseFunction]:
        result = [self.start] + [m.dmf for m in self.moves]
        if self.final is not None:
            result.append(self.final)
        return result


@dataclass
class CancellationResult:
    pair: BirthDeathPair
    trace: SimplificationTrace
    perturbation: float
    lifetime: float
    seconds: float = 0.0

    def to_report(self, entry: PairEntry) -> CancellationReport:
        return CancellationReport(
            pair=entry,
            moves=len(self.trace.moves),
            path=list(self.trace.path.ascending()) if self.trace.path else [],
            perturbation=self.perturbation,
            lifetime=self.lifetime,
            seconds=self.seconds,
        )


def pair_entry(state: MorseState, pair: BirthDeathPair) -> PairEntry:
    h = state.dmf
    return PairEntry(
        dim=pair.dim,
        birth=pair.birth,
        death=pair.death,
        birth_value=h(pair.birth),
        death_value=h(pair.death) if pair.death is not None else None,
        pair_class=state.reduced.pair_class(pair),
    )


def _values_in(state: MorseState, lo: float, hi: float) -> list[float]:
    return sorted({v for v in state.dmf.as_dict().values() if lo <= v <= hi})


def _widest_gap(values: list[float]) -> tuple[float, float]:
    best = max(zip(values, values[1:]), key=lambda g: (g[1] - g[0], -g[0]), default=None)
    if best is None or best[1] <= best[0]:
        raise NoGapError(f"No empty value interval in [{values[0] if values else None}, {values[-1] if values else None}]")
    return best[0], best[1] - best[0]


def choose_gap(state: MorseState, pair: BirthDeathPair, direction: Direction, squeeze: bool = False) -> MoveSpec:
    """
    Place (δ, ξ) at the thirds of the widest empty interval just past the
    next critical cell toward the diagonal. With `squeeze` no critical cell is
    bypassed: right targets the interval just below h(d), down the interval
    just above h(b).

    Raises:
        NoGapError: no empty interval exists
    """
    h = state.dmf
    b, d = pair.birth, pair.death
    if direction == "right":
        if squeeze:
            below = [v for v in _values_in(state, h(b), h(d)) if v < h(d)]
            v, w = below[-1], h(d) - below[-1]
            bypass = None
        else:
            bypass = state.critical_after(b)
            upper = state.critical_after(bypass)
            v, w = _widest_gap(_values_in(state, h(bypass), h(upper)))
        spec = MoveSpec("right", pair, v + w / 3, v + 2 * w / 3, bypass)
    else:
        if squeeze:
            above = [v for v in _values_in(state, h(b), h(d)) if v > h(b)]
            v, w = h(b), above[0] - h(b)
            bypass = None
        else:
            bypass = state.critical_before(d)
            lower = state.critical_before(bypass)
            v, w = _widest_gap(_values_in(state, h(lower), h(bypass)))
        spec = MoveSpec("down", pair, v + 2 * w / 3, v + w / 3, bypass)
    if not w > 0:
        raise NoGapError(f"No room to move {pair} {direction}", cells=list(pair.cells))
    check_move(state, spec)
    return spec


def check_move(state: MorseState, spec: MoveSpec) -> None:
    """
    Raises:
        MoveSpecError: naming the violated clause
    """
    h = state.dmf
    b, d = spec.pair.birth, spec.pair.death
    lo, hi = sorted((spec.delta, spec.xi))
    if spec.direction == "right" and not h(b) < spec.delta < spec.xi < h(d):
        raise MoveSpecError("h(b) < δ < ξ < h(d) fails", cells=[b, d])
    if spec.direction == "down" and not h(b) < spec.xi < spec.delta < h(d):
        raise MoveSpecError("h(b) < ξ < δ < h(d) fails", cells=[b, d])
    occupied = [c for c, v in state.dmf.as_dict().items() if lo <= v <= hi]
    if occupied:
        raise MoveSpecError(f"target interval [{lo}, {hi}] is not empty", cells=occupied)
    if spec.direction == "right":
        passed = [c for c in state.criticals if h(b) < h(c) < spec.delta]
    else:
        passed = [c for c in state.criticals if spec.delta < h(c) < h(d)]
    if len(passed) > 1:
        raise MoveSpecError(f"{len(passed)} critical cells bypassed", cells=passed)
    for e in passed:
        if spec.direction == "right" and state.reaches(e, b):
            raise MoveSpecError(f"bypassed cell {e} reaches {b}", cells=[e, b])
        if spec.direction == "down" and state.reaches(d, e):
            raise MoveSpecError(f"{d} reaches bypassed cell {e}", cells=[d, e])


def _glued(state: MorseState, spec: MoveSpec) -> set[CellId]:
    """
    Cells relocated together with the moving endpoint: those joined to it by
    gradient paths inside the value window, closed under vector partners and
    under cofacets (right) or facets (down) inside the window.

    Raises:
        MoveSpecError: a critical cell other than the endpoint is glued
    """
    h = state.dmf
    X = state.complex
    b, d = spec.pair.birth, spec.pair.death
    if spec.direction == "right":
        anchor, low, high = b, h(b), spec.xi
        seeds = state.field.ancestors(b)
        neighbours = X.cofacets
    else:
        anchor, low, high = d, spec.xi, h(d)
        seeds = state.field.descendants(d)
        neighbours = X.facets

    moved = {anchor}
    stack = [anchor, *(c for c in seeds if low <= h(c) <= high)]
    while stack:
        cell = stack.pop()
        if cell != anchor and cell in state.criticals:
            raise MoveSpecError(f"critical cell {cell} is glued to {anchor}", cells=[cell, anchor])
        moved.add(cell)
        partner = state.field.partner(cell)
        for other in (*neighbours(cell), *((partner,) if partner else ())):
            if other in X and other not in moved and low <= h(other) <= high:
                moved.add(other)
                stack.append(other)
    return moved


def _relocate(state: MorseState, spec: MoveSpec) -> DiscreteMorseFunction:
    """
    Raises:
        MoveSpecError: the target interval is too narrow to keep the moved
            values apart from each other and from the unmoved ones
    """
    h = state.dmf
    b, d = spec.pair.birth, spec.pair.death
    moved = _glued(state, spec)
    updates = {}
    for cell in moved:
        value = h(cell)
        if spec.direction == "right":
            t = (spec.xi - value) / (spec.xi - h(b))
            updates[cell] = t * spec.delta + (1 - t) * spec.xi
        else:
            t = (h(d) - value) / (h(d) - spec.xi)
            updates[cell] = t * spec.xi + (1 - t) * spec.delta

    order = sorted(moved, key=h)
    for x, y in zip(order, order[1:]):
        if (h(x) == h(y)) != (updates[x] == updates[y]) or updates[x] > updates[y]:
            raise MoveSpecError(f"moving {x} and {y} into [{spec.delta}, {spec.xi}] breaks their order", cells=[x, y])
    unmoved = {v for c, v in h.as_dict().items() if c not in moved}
    clashes = sorted(c for c, v in updates.items() if v in unmoved)
    if clashes:
        raise MoveSpecError(f"relocated values meet unmoved ones in [{spec.delta}, {spec.xi}]", cells=clashes)
    return h.with_values(updates)


def move_right(state: MorseState, spec: MoveSpec) -> DiscreteMorseFunction:
    """b and every non-critical cell above it that reaches b, from [h(b), ξ] into [δ, ξ]."""
    if spec.direction != "right":
        raise MoveSpecError("not a right move", cells=list(spec.pair.cells))
    check_move(state, spec)
    return _relocate(state, spec)


def move_down(state: MorseState, spec: MoveSpec) -> DiscreteMorseFunction:
    """d and every non-critical cell reachable from d, from [ξ, h(d)] into [ξ, δ]."""
    if spec.direction != "down":
        raise MoveSpecError("not a down move", cells=list(spec.pair.cells))
    check_move(state, spec)
    return _relocate(state, spec)


def _update_engine(state: MorseState, spec: MoveSpec, h_new: DiscreteMorseFunction) -> Optional[UpdateOutcome]:
    """Transpose the moving endpoint past the bypassed critical cell in the Morse reduction."""
    reduced = state.reduced
    pair = spec.pair
    moving = pair.birth if spec.direction == "right" else pair.death
    e = spec.bypass
    outcome = None
    if e is not None and reduced.dim(e) == reduced.dim(moving):
        other = reduced.pair_of(e)
        v = reduced.values
        if spec.direction == "right":
            if reduced.is_death(e):
                outcome = transpose_mixed(reduced, TranspositionEvent(TranspositionKind.MIXED, moving, e, pair.dim, pair, other))
            elif other.death is None:
                outcome = transpose(reduced, moving, e)
            elif v[other.death] < v[pair.death]:
                outcome = transpose_births(reduced, pair, other)
            else:
                outcome = transpose_births(reduced, other, pair)
        else:
            if not reduced.is_death(e):
                outcome = transpose_mixed(reduced, TranspositionEvent(TranspositionKind.MIXED, e, moving, pair.dim + 1, pair, other))
            elif v[pair.birth] < v[other.birth]:
                outcome = transpose_deaths(reduced, pair, other)
            else:
                outcome = transpose_deaths(reduced, other, pair)
        reduced.values[e] = h_new(e)
    reduced.values[moving] = h_new(moving)
    if reduced.pair_of(pair.birth) != pair:
        raise InvariantViolationError(f"Allowed move changed the pairing of {pair}", cells=list(pair.cells))
    return outcome


def _verify_move(before: MorseState, after: MorseState, spec: MoveSpec, outcome: Optional[UpdateOutcome] = None) -> None:
    X = after.complex
    report = validate_dmf(X, after.dmf)
    if not report.valid:
        raise InvariantViolationError(f"Move produced an invalid dMf: {sorted(report.kinds())}", cells=report.cells())
    if induced_vector_field(X, after.dmf) != before.field:
        raise InvariantViolationError("Move changed the gradient field", cells=list(spec.pair.cells))
    expected = partition_of(before.field)
    for t in HOMOTOPY_SAMPLES:
        if induced_partition(X, before.dmf.interpolate(after.dmf, t)) != expected:
            raise InvariantViolationError(f"Partition not constant along the move at t={t}", cells=list(spec.pair.cells))
    if not forbidden_regions(before, spec.pair).contains(forbidden_regions(after, spec.pair)):
        raise InvariantViolationError("Forbidden regions grew along a move", cells=list(spec.pair.cells))
    check_relations(after.reduced)
    if outcome is None or not outcome.pairing_switched:
        check_incoming_shrink(set(incoming_relations(before.reduced, spec.pair)), after.reduced, spec.pair)
    _verify_reduction(after)


def _verify_reduction(state: MorseState) -> None:
    oracle = brute_reduce(state.morse, state.reduced.values)
    diff = diff_states(state.reduced, oracle, state.dmf.restricted(state.criticals).as_dict())
    if diff:
        raise OracleDiffError(f"Engine and oracle disagree: {diff.summary()}", detail=diff.summary())


def apply_move(state: MorseState, spec: MoveSpec, verify: bool = VERIFY_DEFAULT) -> MoveRecord:
    """Move in place: new dMf, same field, Morse reduction updated."""
    h_new = move_right(state, spec) if spec.direction == "right" else move_down(state, spec)
    before = state.copy() if verify else None
    outcome = _update_engine(state, spec, h_new)
    state.dmf = h_new
    logger.debug(
        f"move {spec.direction} {spec.pair} past {spec.bypass}: δ={spec.delta:.6g} ξ={spec.xi:.6g}"
        + (f" case {outcome.case}" if outcome is not None else "")
    )
    if verify:
        _verify_move(before, state, spec, outcome)
    return MoveRecord(spec, outcome, h_new)


def journey_to_diagonal(state: MorseState, pair: BirthDeathPair, verify: bool = VERIFY_DEFAULT) -> SimplificationTrace:
    """
    Move the pair until its cells are adjacent among critical cells and the
    preimage of [h(b), h(d)] is the unique gradient path between them.

    Raises:
        JourneyBlockedError: neither a right nor a down move applies
    """
    b, d = pair.birth, pair.death
    trace = SimplificationTrace(pair, state.dmf)
    reduced = state.reduced
    while True:
        x = state.critical_after(b)
        if x == d:
            break
        y = state.critical_before(d)
        if not state.reaches(x, b) and (reduced.is_death(x) or not relation(reduced, x, b, "cohom")):
            spec = choose_gap(state, pair, "right")
        elif not state.reaches(d, y) and (not reduced.is_death(y) or not relation(reduced, y, d, "hom")):
            spec = choose_gap(state, pair, "down")
        else:
            raise JourneyBlockedError(f"No allowed move for {pair} between {x} and {y}", cells=[b, d, x, y])
        trace.moves.append(apply_move(state, spec, verify))

    for direction in ("right", "down"):
        trace.moves.append(apply_move(state, choose_gap(state, pair, direction, squeeze=True), verify))

    path = find_path(state.field, d, b)
    h = state.dmf
    window = {c for c, v in h.as_dict().items() if h(b) <= v <= h(d)}
    if window != set(path.cells):
        raise InvariantViolationError(
            f"Preimage of [h(b), h(d)] is not the gradient path of {pair}",
            cells=sorted(window ^ set(path.cells)),
        )
    trace.path = path
    logger.debug(f"journey of {pair}: {len(trace.moves)} moves")
    return trace


def reverse_path_dmf(h: DiscreteMorseFunction, pair: BirthDeathPair, path: GradientPath) -> DiscreteMorseFunction:
    """
    h'(x_i) = h(x_{m - 2⌊i/2⌋}) along b = x_0, ..., x_m = d; other values kept.

    Raises:
        NotReversibleError: the preimage of [h(b), h(d)] is not the path
    """
    cells = path.ascending()
    if cells[0] != pair.birth or cells[-1] != pair.death:
        raise NotReversibleError(f"Path does not join {pair}", cells=list(pair.cells))
    lo, hi = h(pair.birth), h(pair.death)
    window = {c for c, v in h.as_dict().items() if lo <= v <= hi}
    if window != set(cells):
        raise NotReversibleError(
            f"Preimage of [{lo}, {hi}] is not the path of {pair}",
            cells=sorted(window ^ set(cells)),
        )
    m = len(cells) - 1
    return h.with_values({x: h(cells[m - 2 * (i // 2)]) for i, x in enumerate(cells)})


def cancel_pair(state: MorseState, pair: BirthDeathPair, verify: bool = VERIFY_DEFAULT) -> tuple[MorseState, CancellationResult]:
    """
    Journey to the diagonal, then reversal of the unique path. The input
    state is left untouched.

    Raises:
        IneligiblePairError: regions intersect or the pair is not reversible
    """
    started = time.perf_counter()
    if pair.death is None:
        raise IneligiblePairError(f"Pair {pair} is essential", cells=list(pair.cells))
    check = eligible(state, pair)
    if not check.eligible:
        raise IneligiblePairError(f"Pair {pair} is not eligible: {'; '.join(check.reasons)}", cells=list(pair.cells), detail=check.to_dict())

    original = state.dmf
    lifetime = state.lifetime(pair)
    work, knots = state.ranked()
    trace = journey_to_diagonal(work, pair, verify)
    h_ranked = reverse_path_dmf(work.dmf, pair, trace.path)
    trace.final = h_ranked

    field_new = reverse_path(work.field, trace.path)
    if induced_vector_field(work.complex, h_ranked) != field_new:
        raise InvariantViolationError(f"Reversed dMf of {pair} does not induce the reversed field", cells=list(pair.cells))
    if not is_shallow(pair, work.reduced):
        raise InvariantViolationError(f"Pair {pair} is not shallow at the diagonal", cells=list(pair.cells))
    h_final = h_ranked.from_ranks(knots)
    reduced = quotient_state(work.reduced, pair)
    reduced.values = {c: h_final(c) for c in reduced.values}
    result_state = MorseState(work.complex, h_final, field_new, reduced.complex, reduced)

    perturbation = original.max_deviation(h_final)
    if perturbation > lifetime:
        raise InvariantViolationError(
            f"Perturbation {perturbation} exceeds the lifetime {lifetime} of {pair}",
            cells=list(pair.cells),
        )
    if verify:
        report = validate_dmf(work.complex, h_final)
        if not report.valid:
            raise InvariantViolationError(f"Reversal produced an invalid dMf: {sorted(report.kinds())}", cells=report.cells())
        if morse_complex(field_new) != reduced.complex:
            raise InvariantViolationError(f"Quotient by {pair} differs from the Morse complex of the reversed field", cells=list(pair.cells))
        _verify_reduction(result_state)

    seconds = time.perf_counter() - started
    logger.info(f"Cancelled {pair} (dim {pair.dim}, lifetime {lifetime:.6g}) in {len(trace.moves)} moves, {seconds:.3f}s")
    return result_state, CancellationResult(pair, trace, perturbation, lifetime, seconds)


def _by_persistence(state: MorseState, skipped: set) -> list[BirthDeathPair]:
    pairs = [p for p in state.off_diagonal() if p not in skipped]
    return sorted(pairs, key=lambda p: (state.lifetime(p), state.dmf(p.birth), p.birth))


def _next_candidate(state: MorseState, skipped: set, shallow_only: bool) -> Optional[BirthDeathPair]:
    for pair in _by_persistence(state, skipped):
        if shallow_only and not is_shallow(pair, state.reduced):
            continue
        if eligible(state, pair).eligible:
            return pair
    return None


def simplify_all(
    state: MorseState,
    policy: Policy = "shallow-first-then-regions",
    verify: bool = VERIFY_DEFAULT,
    deadline: Optional[float] = None,
    limit: Optional[int] = None,
    on_cancel: Optional[Callable[[MorseState, CancellationResult], None]] = None,
) -> tuple[MorseState, ClassificationReport, list[CancellationResult]]:
    """
    Passes of cancellations until a pass cancels nothing: the standard phase
    cancels shallow eligible pairs, the region phase any eligible pair in
    increasing persistence. `deadline` is a perf_counter timestamp; reaching
    it, or `limit` cancellations, ends the run with an incomplete report.
    """
    entries = {(p.birth, p.death): pair_entry(state, p) for p in state.off_diagonal()}
    report = ClassificationReport()
    results: list[CancellationResult] = []
    skipped: set = set()

    def out_of_time() -> bool:
        if limit is not None and len(results) >= limit:
            return True
        return deadline is not None and time.perf_counter() > deadline

    def attempt(pair: BirthDeathPair, bucket: list) -> bool:
        nonlocal state
        try:
            state, result = cancel_pair(state, pair, verify)
        except (MoveSpecError, NoGapError) as e:
            logger.warning(f"Skipping {pair}: {e.message}")
            skipped.add(pair)
            return False
        bucket.append(entries[(pair.birth, pair.death)])
        results.append(result)
        if on_cancel is not None:
            on_cancel(state, result)
        return True

    while True:
        progress = False
        if policy == "shallow-first-then-regions":
            while not out_of_time() and (pair := _next_candidate(state, skipped, shallow_only=True)) is not None:
                progress |= attempt(pair, report.standard_cancelled)
        if not out_of_time() and (pair := _next_candidate(state, skipped, shallow_only=False)) is not None:
            # a skipped pair also counts: the next pass sees a smaller candidate set
            attempt(pair, report.region_cancelled)
            progress = True
        if out_of_time():
            report.incomplete = True
            logger.warning(f"simplify_all stopped by its budget after {len(results)} cancellations")
            break
        if not progress:
            break

    cancelled = {(e.birth, e.death) for e in report.standard_cancelled + report.region_cancelled}
    report.not_cancellable = [e for key, e in entries.items() if key not in cancelled]
    logger.info(
        f"simplify_all({policy}): {len(report.standard_cancelled)} standard, "
        f"{len(report.region_cancelled)} region, {len(report.not_cancellable)} not cancellable"
    )
    return state, report, results
