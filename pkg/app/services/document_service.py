"""
Document Service
================

Description: JSON, CSV and SVG reading and writing
Version: 1.0.0

Document I/O: complex documents in, diagram documents out.

JSON is the canonical interchange. CSV carries one pair per row and SVG is a
rendering of the diagram (relations as arrows, forbidden regions shaded).
"""

import csv
import io
import json
import logging
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from pydantic import ValidationError  # noqa: E402

from app.config import DEFAULT_SEED  # noqa: E402
from app.exceptions import DocumentError, ValidationFailed  # noqa: E402
from app.models.complex import CellDocument, ComplexDocument, ValidationResponse  # noqa: E402
from app.models.diagram import DiagramDocument, PairEntry, RegionEntry, RelationEntry  # noqa: E402
from app.models.validators import FORMATS  # noqa: E402
from app.services.complex_service import (  # noqa: E402
    DiscreteMorseFunction,
    LefschetzComplex,
    validate_complex,
    validate_dmf,
)
from app.services.generator_service import random_dmf  # noqa: E402
from app.services.morse_state import MorseState  # noqa: E402
from app.services.pairing_service import BirthDeathPair, ReducedState, pair_relations  # noqa: E402
from app.services.region_service import forbidden_regions  # noqa: E402

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["dim", "birth", "death", "birth_value", "death_value", "class"]


def _pydantic_message(e: ValidationError) -> str:
    first = e.errors()[0]
    where = ".".join(str(p) for p in first.get("loc", ()))
    return f"{where}: {first.get('msg')}" if where else str(first.get("msg"))


def load_document(doc: ComplexDocument) -> tuple[LefschetzComplex, Optional[DiscreteMorseFunction]]:
    """
    Build the complex (and the dMf, when values are present) and validate both.

    Raises:
        DocumentError: facet or value referring to an unknown cell
        ValidationFailed: complex or dMf violations
        MissingValueError: values present but incomplete
    """
    ids = {c.id for c in doc.cells}
    dangling = sorted({f for c in doc.cells for f in c.facets if f not in ids})
    if dangling:
        raise DocumentError(f"Facet references to unknown cells: {', '.join(dangling)}", cells=dangling)
    if doc.values is not None:
        unknown = sorted(set(doc.values) - ids)
        if unknown:
            raise DocumentError(f"Values for unknown cells: {', '.join(unknown)}", cells=unknown)

    X = LefschetzComplex({c.id: c.dim for c in doc.cells}, {c.id: c.facets for c in doc.cells})
    report = validate_complex(X)
    if not report.valid:
        raise ValidationFailed("Invalid complex", cells=report.cells(), detail=report.model_dump())
    if doc.values is None:
        return X, None

    h = DiscreteMorseFunction(doc.values)
    report = validate_dmf(X, h)
    if not report.valid:
        raise ValidationFailed("Invalid discrete Morse function", cells=report.cells(), detail=report.model_dump())
    logger.debug(f"Loaded complex with {len(X)} cells and values")
    return X, h


def parse_complex(text: str | bytes) -> tuple[LefschetzComplex, Optional[DiscreteMorseFunction]]:
    """
    Raises:
        DocumentError: malformed JSON or schema violation
    """
    try:
        doc = ComplexDocument.model_validate_json(text)
    except ValidationError as e:
        if any(err.get("type") == "json_invalid" for err in e.errors()):
            raise DocumentError(f"Malformed JSON: {_pydantic_message(e)}") from e
        raise DocumentError(f"Invalid complex document: {_pydantic_message(e)}") from e
    return load_document(doc)


def complex_to_document(X: LefschetzComplex, h: Optional[DiscreteMorseFunction] = None) -> ComplexDocument:
    cells = [
        CellDocument(id=c, dim=X.dim(c), facets=sorted(X.facets(c)))
        for c in sorted(X, key=lambda c: (X.dim(c), c))
    ]
    values = {c: h(c) for c in sorted(X)} if h is not None else None
    return ComplexDocument(cells=cells, values=values)


def _entry(state: ReducedState, pair: BirthDeathPair) -> PairEntry:
    return PairEntry(
        dim=pair.dim,
        birth=pair.birth,
        death=pair.death,
        birth_value=state.values[pair.birth],
        death_value=state.values[pair.death] if pair.death is not None else None,
        pair_class=state.pair_class(pair),
    )


def _relations(state: ReducedState) -> list[RelationEntry]:
    return [
        RelationEntry(source=beta.birth, target=alpha.birth, kind=kind)
        for beta, alpha, kind in sorted(pair_relations(state), key=lambda r: (r[1], r[0], r[2]))
    ]


def diagram_from_state(state: ReducedState) -> DiagramDocument:
    """Every pair of a reduced state, diagonal ones included."""
    pairs = sorted(state.pairs(), key=lambda p: (p.dim, state.values[p.birth], p.birth))
    return DiagramDocument(pairs=[_entry(state, p) for p in pairs], relations=_relations(state))


def diagram_from_morse_state(state: MorseState, regions: bool = False) -> DiagramDocument:
    """
    Critical pairs from the Morse complex reduction plus one diagonal pair
    per vector, so that the pairs partition the cell set.
    """
    h = state.dmf
    entries = [_entry(state.reduced, p) for p in state.pairs()]
    entries += [
        PairEntry(dim=p.dim, birth=p.birth, death=p.death, birth_value=h(p.birth),
                  death_value=h(p.death), pair_class="diagonal")
        for p in state.vector_pairs()
    ]
    entries.sort(key=lambda e: (e.dim, e.birth_value, e.birth))
    region_entries = None
    if regions:
        region_entries = []
        for pair in state.off_diagonal():
            r = forbidden_regions(state, pair)
            region_entries.append(RegionEntry(
                pair=pair.birth,
                death_region=r.death_region.as_lists(),
                birth_region=r.birth_region.as_lists(),
            ))
    return DiagramDocument(pairs=entries, relations=_relations(state.reduced), regions=region_entries)


def parse_diagram(text: str | bytes) -> DiagramDocument:
    try:
        return DiagramDocument.model_validate_json(text)
    except ValidationError as e:
        raise DocumentError(f"Invalid diagram document: {_pydantic_message(e)}") from e


def _emit_csv(doc: DiagramDocument) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for entry in doc.pairs:
        row = entry.model_dump(by_alias=True)
        writer.writerow({k: "" if row[k] is None else row[k] for k in CSV_COLUMNS})
    return buffer.getvalue()


def _emit_svg(doc: DiagramDocument) -> str:
    finite = [e for e in doc.pairs if e.pair_class == "off-diagonal"]
    values = [v for e in doc.pairs for v in (e.birth_value, e.death_value) if v is not None]
    lo, hi = (min(values), max(values)) if values else (0.0, 1.0)
    pad = (hi - lo) * 0.05 or 1.0
    lo, hi = lo - pad, hi + pad

    fig, ax = plt.subplots(figsize=(6, 6))
    try:
        ax.plot([lo, hi], [lo, hi], color="grey", linewidth=0.8)
        for dim in sorted({e.dim for e in finite}):
            pts = [e for e in finite if e.dim == dim]
            ax.scatter([e.birth_value for e in pts], [e.death_value for e in pts], s=14, label=f"H{dim}")
        essentials = [e for e in doc.pairs if e.pair_class == "essential"]
        if essentials:
            ax.scatter([e.birth_value for e in essentials], [hi] * len(essentials), marker="^", s=18,
                       color="black", label="essential")

        points = {e.birth: (e.birth_value, e.death_value if e.death_value is not None else hi) for e in doc.pairs}
        for rel in doc.relations:
            (x0, y0), (x1, y1) = points[rel.source], points[rel.target]
            ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                        arrowprops={"arrowstyle": "->", "color": "tab:red" if rel.kind == "hom" else "tab:blue",
                                    "linewidth": 0.6})

        for region in doc.regions or []:
            for a, b in region.death_region:
                ax.fill_between([lo, a], lo, b, color="tab:red", alpha=0.08, linewidth=0)
            for c, d in region.birth_region:
                ax.fill_between([c, hi], d, hi, color="tab:blue", alpha=0.08, linewidth=0)

        ax.set_xlim(lo, hi)
        ax.set_ylim(lo, hi)
        ax.set_xlabel("birth")
        ax.set_ylabel("death")
        if finite or essentials:
            ax.legend(loc="lower right", fontsize="small")
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg")
        return buffer.getvalue()
    finally:
        plt.close(fig)


def emit_diagram(doc: DiagramDocument, fmt: str = "json") -> str:
    """
    Raises:
        DocumentError: unknown format
    """
    if fmt == "json":
        return doc.model_dump_json(by_alias=True, indent=2)
    if fmt == "csv":
        return _emit_csv(doc)
    if fmt == "svg":
        return _emit_svg(doc)
    raise DocumentError(f"Unknown format {fmt!r} (expected one of {', '.join(FORMATS)})")


def dump_json(payload) -> str:
    """Indented JSON of a pydantic model or plain data, for CLI output."""
    if hasattr(payload, "model_dump_json"):
        return payload.model_dump_json(by_alias=True, indent=2)
    return json.dumps(payload, indent=2, sort_keys=True, default=str)


def validation_response(doc: ComplexDocument) -> ValidationResponse:
    """
    Full validation report of a document; dangling references are reported
    as violations instead of raising.
    """
    X = LefschetzComplex({c.id: c.dim for c in doc.cells}, {c.id: c.facets for c in doc.cells})
    complex_report = validate_complex(X)
    dmf_report = None
    if doc.values is not None and complex_report.valid:
        unknown = sorted(set(doc.values) - set(X))
        if unknown:
            raise DocumentError(f"Values for unknown cells: {', '.join(unknown)}", cells=unknown)
        dmf_report = validate_dmf(X, DiscreteMorseFunction(doc.values))
    valid = complex_report.valid and (dmf_report is None or dmf_report.valid)
    return ValidationResponse(valid=valid, cell_count=len(X), complex=complex_report, dmf=dmf_report)


def state_from_document(doc: ComplexDocument, seed: int = DEFAULT_SEED) -> MorseState:
    """Engine state of a document; a random dMf is drawn when values are absent."""
    X, h = load_document(doc)
    if h is None:
        h = random_dmf(X, seed)
        logger.info(f"No values in document: random dMf drawn with seed {seed}")
    return MorseState.build(X, h)
