"""
Morse State
===========

Description: Engine state shared by moves, cancellations and sessions
Version: 1.0.0

Engine state of the cancellation driver: the complex, its dMf, the induced
gradient field, the Morse complex and the reduced state of the Morse complex
filtered by the critical values.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from app.exceptions import UnknownPairError, ValidationFailed
from app.services.complex_service import (
    CellId,
    DiscreteMorseFunction,
    LefschetzComplex,
    validate_complex,
    validate_dmf,
)
from app.services.pairing_service import BirthDeathPair, ReducedState, build_state
from app.services.vector_field_service import (
    CombinatorialVectorField,
    induced_vector_field,
    morse_complex,
    morse_function,
)

logger = logging.getLogger(__name__)


@dataclass
class MorseState:
    complex: LefschetzComplex
    dmf: DiscreteMorseFunction
    field: CombinatorialVectorField
    morse: LefschetzComplex
    reduced: ReducedState

    @classmethod
    def build(cls, X: LefschetzComplex, h: DiscreteMorseFunction) -> "MorseState":
        """
        Validate complex and dMf, then build the field, the Morse complex and its reduction.

        Raises:
            ValidationFailed: complex or dMf report non-empty
        """
        report = validate_complex(X)
        if not report.valid:
            raise ValidationFailed("Invalid complex", cells=report.cells(), detail=report.model_dump())
        report = validate_dmf(X, h)
        if not report.valid:
            raise ValidationFailed("Invalid discrete Morse function", cells=report.cells(), detail=report.model_dump())
        V = induced_vector_field(X, h)
        M = morse_complex(V)
        reduced = build_state(M, morse_function(h, V))
        logger.debug(f"MorseState: {len(X)} cells, {len(V.criticals)} critical")
        return cls(X, h, V, M, reduced)

    def copy(self) -> "MorseState":
        return MorseState(self.complex, self.dmf, self.field, self.morse, self.reduced.copy())

    def ranked(self) -> tuple["MorseState", list[float]]:
        """Copy filtered by the dense ranks of the values, with the knots to map back."""
        h, knots = self.dmf.ranked()
        work = self.copy()
        work.dmf = h
        work.reduced.values = {c: h(c) for c in work.reduced.values}
        return work, knots

    @property
    def criticals(self) -> frozenset:
        return self.field.criticals

    def value(self, cell: CellId) -> float:
        return self.dmf(cell)

    def critical_order(self) -> list[CellId]:
        """Critical cells of every dimension in h-order."""
        return sorted(self.criticals, key=lambda c: (self.dmf(c), self.complex.dim(c), c))

    def critical_after(self, cell: CellId) -> Optional[CellId]:
        order = self.critical_order()
        i = order.index(cell)
        return order[i + 1] if i + 1 < len(order) else None

    def critical_before(self, cell: CellId) -> Optional[CellId]:
        order = self.critical_order()
        i = order.index(cell)
        return order[i - 1] if i > 0 else None

    def pairs(self) -> list[BirthDeathPair]:
        """Critical pairs (those of the Morse complex)."""
        return self.reduced.pairs()

    def vector_pairs(self) -> list[BirthDeathPair]:
        """Diagonal pairs, one per vector."""
        return sorted(
            BirthDeathPair(self.complex.dim(x), x, y) for x, y in self.field.vectors
        )

    def off_diagonal(self) -> list[BirthDeathPair]:
        return [p for p in self.pairs() if p.death is not None]

    def pair_of(self, cell: CellId) -> BirthDeathPair:
        return self.reduced.pair_of(cell)

    def lifetime(self, pair: BirthDeathPair) -> float:
        return self.reduced.persistence(pair)

    def reaches(self, source: CellId, target: CellId) -> bool:
        return self.field.reaches(source, target)

    def resolve(self, text: str) -> BirthDeathPair:
        """
        Critical pair named by one of its cells or by "birth,death".

        Raises:
            UnknownPairError: the cells are not critical or not paired together
        """
        cells = [part.strip() for part in text.split(",") if part.strip()]
        if not cells or len(cells) > 2:
            raise UnknownPairError(f"Cannot read a pair from {text!r}")
        for cell in cells:
            if cell not in self.complex:
                raise UnknownPairError(f"Unknown cell {cell}", cells=[cell])
            if cell not in self.criticals:
                raise UnknownPairError(f"Cell {cell} is not critical", cells=[cell])
        pair = self.pair_of(cells[0])
        if len(cells) == 2 and pair.cells != tuple(cells):
            raise UnknownPairError(f"{cells[0]} and {cells[1]} are not a birth-death pair (found {pair})", cells=cells)
        return pair
