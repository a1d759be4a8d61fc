"""
Experiments API Router
======================

Description: FastAPI router for the simplex simplification experiment
Version: 1.0.0

Runs are CPU bound and long, so the endpoint is rate limited per client.
"""

from fastapi import APIRouter, Depends, Request
from starlette.concurrency import run_in_threadpool

from app.config import RATE_LIMIT_EXPERIMENTS, api_key_header, limiter, validate_api_key
from app.models.reports import ExperimentReport, ExperimentRequest
from app.services.experiment_service import run_experiments

router = APIRouter(
    tags=["v1 - Esperimenti"],
    responses={404: {"description": "Not found"}}
)


@router.post(
    "/",
    response_model=list[ExperimentReport],
    response_model_by_alias=True,
    summary="Esegue l'esperimento sul simplesso",
    description=(
        "Costruisce il simplesso di dimensione `d`, genera una funzione casuale a bande per ogni seme, "
        "esegue la semplificazione e restituisce classificazione, tempi e controlli dell'oracolo.\n\n"
        "**Endpoint:** `POST /api/v1/experiments/`\n\n"
        "**Rate Limiting:**\n"
        f"- {RATE_LIMIT_EXPERIMENTS} per IP\n\n"
        "**Risposte:**\n"
        "- `200 OK`: Un report per seme, nello stesso ordine\n"
        "- `401 Unauthorized`: API key mancante o non valida\n"
        "- `422 Unprocessable Entity`: Parametri non validi o dimensione oltre il limite\n"
        "- `429 Too Many Requests`: Rate limit superato\n\n"
        "**Esempio di richiesta:**\n"
        "```json\n"
        '{"d": 4, "seeds": [0, 1], "workers": 2, "scaling": false, "verify": true, "time_budget": 60}\n'
        "```"
    ),
    responses={
        200: {"description": "Report degli esperimenti"},
        401: {"description": "API key mancante o non valida"},
        429: {"description": "Rate limit superato"},
    }
)
@limiter.limit(RATE_LIMIT_EXPERIMENTS)
async def run_experiment_endpoint(
    request: Request,
    body: ExperimentRequest,
    api_key: str = Depends(api_key_header)
):
    """
    Esegue l'esperimento per ciascun seme richiesto.

    Args:
        request: FastAPI request object (richiesto dal rate limiter)
        body: Parametri dell'esperimento
        api_key: Chiave API per l'autenticazione

    Returns:
        list[ExperimentReport]: Report per seme
    """
    validate_api_key(api_key)

    return await run_in_threadpool(
        run_experiments, body.d, body.seeds, body.workers, body.verify, body.scaling, body.time_budget
    )
