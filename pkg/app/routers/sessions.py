"""
Sessions API Router
===================

Description: FastAPI router for stateful simplification sessions
Version: 1.0.0

A session keeps the engine state of one complex between requests: its
diagram, the forbidden regions and eligibility of single pairs, single
cancellations and full simplification runs. Every mutation runs inside
session_transaction, so a failed cancellation leaves the session unchanged.
"""

import logging
from typing import Literal

from fastapi import APIRouter, Depends, Path, Query, Response
from starlette.concurrency import run_in_threadpool

from app.config import DEFAULT_SEED, VERIFY_DEFAULT, api_key_header, validate_api_key
from app.exceptions import IneligiblePairError
from app.models.complex import ComplexDocument
from app.models.diagram import RegionEntry
from app.models.reports import (
    CancellationReport,
    ClassificationReport,
    EligibilityResponse,
    SessionInfo,
    SimplifyRequest,
)
from app.services.document_service import diagram_from_morse_state, emit_diagram, state_from_document
from app.services.morse_state import MorseState
from app.services.region_service import eligible, forbidden_regions
from app.services.simplification_service import cancel_pair, pair_entry, simplify_all
from app.store import get_session_store, session_transaction

logger = logging.getLogger(__name__)

router = APIRouter(
    tags=["v1 - Sessioni"],
    responses={404: {"description": "Sessione o coppia non trovata"}}
)

MEDIA_TYPES = {"json": "application/json", "csv": "text/csv", "svg": "image/svg+xml"}


def _info(session_id: str, state: MorseState) -> SessionInfo:
    return SessionInfo(
        id=session_id,
        cells=len(state.complex),
        criticals=len(state.criticals),
        pairs=len(state.pairs()),
        off_diagonal=len(state.off_diagonal()),
    )


def _create(doc: ComplexDocument, seed: int) -> SessionInfo:
    state = state_from_document(doc, seed)
    session_id = get_session_store().create(state)
    return _info(session_id, state)


@router.post(
    "/",
    response_model=SessionInfo,
    status_code=201,
    summary="Crea una sessione",
    description=(
        "Valida il documento, costruisce campo di gradiente, complesso di Morse e riduzione, "
        "e li conserva in una nuova sessione.\n\n"
        "**Endpoint:** `POST /api/v1/sessions/`\n\n"
        "**Parametri:**\n"
        "- `seed` (int): Seme della funzione casuale se il documento non ha valori\n\n"
        "**Risposte:**\n"
        "- `201 Created`: Sessione creata\n"
        "- `400 Bad Request`: Riferimenti a celle inesistenti\n"
        "- `401 Unauthorized`: API key mancante o non valida\n"
        "- `422 Unprocessable Entity`: Complesso o funzione non validi\n"
        "- `503 Service Unavailable`: Numero massimo di sessioni raggiunto"
    ),
    responses={
        201: {"description": "Sessione creata con successo"},
        401: {"description": "API key mancante o non valida"},
        503: {"description": "Numero massimo di sessioni raggiunto"},
    }
)
async def create_session(
    doc: ComplexDocument,
    seed: int = Query(DEFAULT_SEED, description="Seme della funzione casuale"),
    api_key: str = Depends(api_key_header)
):
    validate_api_key(api_key)

    return await run_in_threadpool(_create, doc, seed)


@router.get(
    "/{session_id}/diagram",
    summary="Diagramma della sessione",
    description=(
        "Restituisce il diagramma di persistenza corrente nel formato richiesto.\n\n"
        "**Parametri:**\n"
        "- `format`: `json` (predefinito), `csv` oppure `svg`\n"
        "- `regions` (bool): Include le regioni proibite (JSON e SVG)"
    ),
    responses={
        200: {"description": "Diagramma nel formato richiesto"},
        401: {"description": "API key mancante o non valida"},
        404: {"description": "Sessione non trovata"},
    }
)
async def session_diagram(
    session_id: str = Path(..., description="Identificativo della sessione"),
    fmt: Literal["json", "csv", "svg"] = Query("json", alias="format", description="Formato di uscita"),
    regions: bool = Query(False, description="Includi le regioni proibite"),
    api_key: str = Depends(api_key_header)
):
    validate_api_key(api_key)

    state = get_session_store().get(session_id)
    doc = await run_in_threadpool(diagram_from_morse_state, state, regions)
    content = await run_in_threadpool(emit_diagram, doc, fmt)
    return Response(content=content, media_type=MEDIA_TYPES[fmt])


def _regions(state: MorseState, pair_spec: str) -> RegionEntry:
    pair = state.resolve(pair_spec)
    regions = forbidden_regions(state, pair)
    return RegionEntry(
        pair=pair.birth,
        death_region=regions.death_region.as_lists(),
        birth_region=regions.birth_region.as_lists(),
    )


@router.get(
    "/{session_id}/pairs/{birth}/regions",
    response_model=RegionEntry,
    summary="Regioni proibite di una coppia",
    description=(
        "Angoli delle regioni proibite per la morte (quadranti in basso a sinistra) "
        "e per la nascita (quadranti in alto a destra) della coppia indicata.\n\n"
        "**Risposte:**\n"
        "- `200 OK`: Regioni della coppia\n"
        "- `404 Not Found`: Sessione o coppia non trovata\n"
        "- `422 Unprocessable Entity`: Coppia essenziale"
    ),
)
async def pair_regions(
    session_id: str = Path(..., description="Identificativo della sessione"),
    birth: str = Path(..., description="Cella di nascita (o di morte) della coppia"),
    api_key: str = Depends(api_key_header)
):
    validate_api_key(api_key)

    state = get_session_store().get(session_id)
    return await run_in_threadpool(_regions, state, birth)


def _eligibility(state: MorseState, pair_spec: str) -> EligibilityResponse:
    result = eligible(state, state.resolve(pair_spec))
    return EligibilityResponse(**result.to_dict())


@router.get(
    "/{session_id}/pairs/{birth}/eligibility",
    response_model=EligibilityResponse,
    summary="Verifica se una coppia e cancellabile",
    description=(
        "Una coppia e cancellabile se le sue regioni proibite sono disgiunte e "
        "un solo cammino di gradiente collega la morte alla nascita.\n\n"
        "**Risposte:**\n"
        "- `200 OK`: Esito con le ragioni del rifiuto\n"
        "- `404 Not Found`: Sessione o coppia non trovata"
    ),
)
async def pair_eligibility(
    session_id: str = Path(..., description="Identificativo della sessione"),
    birth: str = Path(..., description="Cella di nascita (o di morte) della coppia"),
    api_key: str = Depends(api_key_header)
):
    validate_api_key(api_key)

    state = get_session_store().get(session_id)
    return await run_in_threadpool(_eligibility, state, birth)


def _cancel(session_id: str, pair_spec: str, verify: bool) -> CancellationReport:
    with session_transaction(session_id) as work:
        pair = work.state.resolve(pair_spec)
        entry = pair_entry(work.state, pair)
        work.state, result = cancel_pair(work.state, pair, verify)
    return result.to_report(entry)


@router.post(
    "/{session_id}/pairs/{birth}/cancel",
    response_model=CancellationReport,
    response_model_by_alias=True,
    summary="Cancella una coppia",
    description=(
        "Porta la coppia sulla diagonale con mosse consentite e inverte il cammino di gradiente. "
        "Le altre coppie fuori diagonale restano invariate.\n\n"
        "**Parametri:**\n"
        "- `verify` (bool): Controlla ogni passo con l'oracolo di riduzione densa\n\n"
        "**Risposte:**\n"
        "- `200 OK`: Resoconto della cancellazione\n"
        "- `404 Not Found`: Sessione o coppia non trovata\n"
        "- `409 Conflict`: Coppia non cancellabile (regioni intersecanti o cammini non unici)\n"
        "- `500 Internal Server Error`: Violazione di un invariante interno"
    ),
    responses={
        409: {"description": "Coppia non cancellabile"},
    }
)
async def cancel_session_pair(
    session_id: str = Path(..., description="Identificativo della sessione"),
    birth: str = Path(..., description="Cella di nascita (o di morte) della coppia"),
    verify: bool = Query(VERIFY_DEFAULT, description="Verifica con l'oracolo"),
    api_key: str = Depends(api_key_header)
):
    validate_api_key(api_key)

    try:
        return await run_in_threadpool(_cancel, session_id, birth, verify)
    except IneligiblePairError as e:
        logger.info(f"Session {session_id}: pair {birth} not cancellable: {e.message}")
        raise


def _simplify(session_id: str, request: SimplifyRequest) -> ClassificationReport:
    with session_transaction(session_id) as work:
        work.state, report, _ = simplify_all(work.state, request.policy, request.verify)
    return report


@router.post(
    "/{session_id}/simplify",
    response_model=ClassificationReport,
    response_model_by_alias=True,
    summary="Semplifica la funzione",
    description=(
        "Cancella ripetutamente le coppie cancellabili: prima le coppie superficiali "
        "(metodo standard), poi quelle rese possibili dalle regioni proibite.\n\n"
        "**Politiche:**\n"
        "- `shallow-first-then-regions` (predefinita)\n"
        "- `regions-only`\n\n"
        "**Risposte:**\n"
        "- `200 OK`: Classificazione delle coppie fuori diagonale\n"
        "- `404 Not Found`: Sessione non trovata"
    ),
)
async def simplify_session(
    request: SimplifyRequest,
    session_id: str = Path(..., description="Identificativo della sessione"),
    api_key: str = Depends(api_key_header)
):
    validate_api_key(api_key)

    return await run_in_threadpool(_simplify, session_id, request)


@router.delete(
    "/{session_id}",
    status_code=204,
    summary="Elimina una sessione",
    responses={
        204: {"description": "Sessione eliminata"},
        404: {"description": "Sessione non trovata"},
    }
)
async def delete_session(
    session_id: str = Path(..., description="Identificativo della sessione"),
    api_key: str = Depends(api_key_header)
):
    validate_api_key(api_key)

    get_session_store().delete(session_id)
    return Response(status_code=204)
