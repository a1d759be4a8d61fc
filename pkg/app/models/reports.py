from collections import Counter
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator

from app.config import EXPERIMENT_TIME_BUDGET
from app.models.diagram import PairEntry
from app.models.validators import validate_policy

Policy = Literal["shallow-first-then-regions", "regions-only"]


class ClassificationReport(BaseModel):
    """
    Classificazione delle coppie fuori diagonale dopo la semplificazione.
    """
    standard_cancelled: list[PairEntry] = Field(default_factory=list, description="Coppie cancellate dal metodo standard")
    region_cancelled: list[PairEntry] = Field(default_factory=list, description="Coppie cancellate grazie alle regioni proibite")
    not_cancellable: list[PairEntry] = Field(default_factory=list, description="Coppie non cancellabili")
    incomplete: bool = Field(False, description="Vero se il tempo a disposizione e terminato prima della fine")

    @property
    def counts(self) -> dict[int, dict[str, int]]:
        result: dict[int, dict[str, int]] = {}
        for label in ("standard_cancelled", "region_cancelled", "not_cancellable"):
            for dim, n in Counter(p.dim for p in getattr(self, label)).items():
                result.setdefault(dim, {}).setdefault(label, 0)
                result[dim][label] += n
        return dict(sorted(result.items()))

    @property
    def cancelled(self) -> int:
        return len(self.standard_cancelled) + len(self.region_cancelled)


class CancellationReport(BaseModel):
    pair: PairEntry
    moves: int = Field(..., ge=0, description="Mosse consentite eseguite prima dell'inversione")
    path: list[str] = Field(default_factory=list, description="Cammino invertito, dalla nascita alla morte")
    perturbation: float = Field(..., ge=0, description="Massima variazione della funzione")
    lifetime: float = Field(..., ge=0)
    seconds: float = Field(0.0, ge=0)


class ComplexityReport(BaseModel):
    n: int = Field(..., ge=0, description="Numero di celle")
    c: int = Field(..., ge=0, description="Numero di coppie nascita-morte")
    obstacles: dict[str, int] = Field(default_factory=dict, description="m(α) per coppia, indicizzato dalla cella di nascita")
    timings: list[float] = Field(default_factory=list, description="Tempo per cancellazione (secondi)")


class ScalingPoint(BaseModel):
    dim: int
    cells: int
    pairs: int
    cancellations: int
    mean_seconds: float


class ExperimentReport(BaseModel):
    d: int
    seed: int
    cells: int
    classification: ClassificationReport
    complexity: ComplexityReport
    bands_separated: bool
    oracle_checks: int = 0
    oracle_diffs: int = 0
    scaling: list[ScalingPoint] = Field(default_factory=list)
    incomplete: bool = False


class SimplifyRequest(BaseModel):
    policy: Policy = "shallow-first-then-regions"
    verify: bool = False

    @field_validator('policy', mode='before')
    @classmethod
    def check_policy(cls, v):
        return validate_policy(v)


class ExperimentRequest(BaseModel):
    d: int = Field(..., ge=0, le=12, description="Dimensione del simplesso")
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    workers: int = Field(1, ge=1, le=16)
    scaling: bool = False
    verify: bool = False
    time_budget: float = Field(EXPERIMENT_TIME_BUDGET, gt=0, le=3600, description="Secondi a disposizione per ogni seme")


class SessionInfo(BaseModel):
    id: str
    cells: int
    criticals: int
    pairs: int
    off_diagonal: int


class EligibilityResponse(BaseModel):
    pair: str
    eligible: bool
    path_count: int
    blocking: Optional[list[list[float]]] = None
    reasons: list[str] = Field(default_factory=list)
