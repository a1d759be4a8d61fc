"""
Complexes API Router
====================

Description: FastAPI router for stateless complex validation and diagrams
Version: 1.0.0

This module defines the endpoints that validate complex documents and compute
persistence diagrams without creating a session.
"""

from fastapi import APIRouter, Depends, File, Query, UploadFile
from starlette.concurrency import run_in_threadpool

from app.config import DEFAULT_SEED, api_key_header, validate_api_key
from app.exceptions import DocumentError
from app.models.complex import ComplexDocument, ValidationResponse
from app.models.diagram import DiagramDocument
from app.services.document_service import (
    diagram_from_morse_state,
    state_from_document,
    validation_response,
)

router = APIRouter(
    tags=["v1 - Complessi"],
    responses={404: {"description": "Not found"}}
)


@router.post(
    "/validate",
    response_model=ValidationResponse,
    summary="Valida un documento di complesso",
    description=(
        "Verifica le condizioni del complesso di Lefschetz (dimensioni, bordo al quadrato nullo, "
        "riferimenti) e, se presenti i valori, della funzione di Morse discreta.\n\n"
        "**Endpoint:** `POST /api/v1/complexes/validate`\n\n"
        "**Autenticazione:**\n"
        "- Richiede l'header `X-API-Key` per l'autenticazione\n\n"
        "**Risposte:**\n"
        "- `200 OK`: Report di validazione (anche quando il documento non e valido)\n"
        "- `401 Unauthorized`: API key mancante o non valida\n"
        "- `422 Unprocessable Entity`: Documento non conforme allo schema\n\n"
        "**Esempio di richiesta:**\n"
        "```json\n"
        "{\n"
        '  "cells": [\n'
        '    {"id": "a", "dim": 0, "facets": []},\n'
        '    {"id": "b", "dim": 0, "facets": []},\n'
        '    {"id": "ab", "dim": 1, "facets": ["a", "b"]}\n'
        "  ],\n"
        '  "values": {"a": 0, "b": 1, "ab": 2}\n'
        "}\n"
        "```"
    ),
    responses={
        200: {"description": "Report di validazione"},
        401: {"description": "API key mancante o non valida"},
    }
)
async def validate_document(
    doc: ComplexDocument,
    api_key: str = Depends(api_key_header)
):
    """
    Valida il documento e restituisce il report completo.

    Args:
        doc: Documento del complesso
        api_key: Chiave API per l'autenticazione

    Returns:
        ValidationResponse: Report di validazione del complesso e della funzione
    """
    validate_api_key(api_key)

    return await run_in_threadpool(validation_response, doc)


@router.post(
    "/upload",
    response_model=ValidationResponse,
    summary="Valida un file di complesso",
    description=(
        "Come `/validate`, ma il documento JSON viene caricato come file multipart.\n\n"
        "**Endpoint:** `POST /api/v1/complexes/upload`\n\n"
        "**Risposte:**\n"
        "- `200 OK`: Report di validazione\n"
        "- `400 Bad Request`: File non leggibile o JSON malformato\n"
        "- `401 Unauthorized`: API key mancante o non valida"
    ),
    responses={
        200: {"description": "Report di validazione"},
        400: {"description": "File non leggibile o JSON malformato"},
        401: {"description": "API key mancante o non valida"},
    }
)
async def upload_document(
    file: UploadFile = File(..., description="Documento JSON del complesso"),
    api_key: str = Depends(api_key_header)
):
    """
    Valida un documento caricato come file.

    Raises:
        DocumentError: JSON malformato o schema non rispettato
    """
    validate_api_key(api_key)

    content = await file.read()
    try:
        doc = ComplexDocument.model_validate_json(content)
    except ValueError as e:
        raise DocumentError(f"Invalid complex document {file.filename}: {e}") from e
    return await run_in_threadpool(validation_response, doc)


def _diagram(doc: ComplexDocument, seed: int, regions: bool) -> DiagramDocument:
    return diagram_from_morse_state(state_from_document(doc, seed), regions=regions)


@router.post(
    "/diagram",
    response_model=DiagramDocument,
    response_model_by_alias=True,
    summary="Calcola il diagramma di persistenza",
    description=(
        "Calcola coppie nascita-morte e relazioni (omologiche e coomologiche) del documento. "
        "Se i valori mancano viene generata una funzione casuale con il seme indicato.\n\n"
        "**Endpoint:** `POST /api/v1/complexes/diagram`\n\n"
        "**Parametri:**\n"
        "- `seed` (int): Seme della funzione casuale (solo senza valori)\n"
        "- `regions` (bool): Include le regioni proibite delle coppie fuori diagonale\n\n"
        "**Risposte:**\n"
        "- `200 OK`: Diagramma di persistenza\n"
        "- `400 Bad Request`: Riferimenti a celle inesistenti\n"
        "- `422 Unprocessable Entity`: Complesso o funzione non validi"
    ),
    responses={
        200: {"description": "Diagramma di persistenza"},
        400: {"description": "Riferimenti a celle inesistenti"},
        401: {"description": "API key mancante o non valida"},
        422: {"description": "Complesso o funzione non validi"},
    }
)
async def compute_diagram(
    doc: ComplexDocument,
    seed: int = Query(DEFAULT_SEED, description="Seme della funzione casuale"),
    regions: bool = Query(False, description="Includi le regioni proibite"),
    api_key: str = Depends(api_key_header)
):
    validate_api_key(api_key)

    return await run_in_threadpool(_diagram, doc, seed, regions)
