from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.models.validators import validate_cell_id, validate_dimension, validate_finite_value

ViolationKind = Literal[
    "dimension",
    "square-zero",
    "dangling",
    "weak-monotonicity",
    "pairing",
    "almost-injective",
]


class CellDocument(BaseModel):
    """
    Schema di una cella nel documento del complesso.
    """
    id: str = Field(..., description="Identificativo stabile della cella")
    dim: int = Field(..., description="Dimensione della cella (intero non negativo)")
    facets: list[str] = Field(default_factory=list, description="Facce con coefficiente 1 nel bordo")

    @field_validator('id')
    @classmethod
    def check_id(cls, v):
        return validate_cell_id(v)

    @field_validator('dim')
    @classmethod
    def check_dim(cls, v):
        return validate_dimension(v)

    @field_validator('facets')
    @classmethod
    def check_facets(cls, v):
        if len(set(v)) != len(v):
            raise ValueError('Una faccia compare piu volte nel bordo della stessa cella')
        return [validate_cell_id(f) for f in v]


class ComplexDocument(BaseModel):
    """
    Documento di interscambio: celle, bordo e valori (opzionali) della funzione di Morse discreta.
    Se `values` manca, la funzione viene generata.
    """
    cells: list[CellDocument] = Field(default_factory=list, description="Celle del complesso di Lefschetz")
    values: Optional[dict[str, float]] = Field(None, description="Valori della funzione per cella (opzionale)")

    @field_validator('values')
    @classmethod
    def check_values(cls, v):
        if v is None:
            return v
        return {validate_cell_id(k): validate_finite_value(x) for k, x in v.items()}

    @model_validator(mode='after')
    def check_unique_ids(self):
        seen = set()
        for cell in self.cells:
            if cell.id in seen:
                raise ValueError(f"Identificativo cella duplicato: {cell.id}")
            seen.add(cell.id)
        return self


class Violation(BaseModel):
    kind: ViolationKind = Field(..., description="Condizione violata")
    cells: list[str] = Field(..., description="Celle coinvolte nella violazione")
    detail: str = Field("", description="Descrizione leggibile")


class ValidationReport(BaseModel):
    """
    Esito della validazione; un report senza violazioni indica un input valido.
    """
    subject: Literal["complex", "dmf"] = Field(..., description="Oggetto validato")
    violations: list[Violation] = Field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def add(self, kind: ViolationKind, cells, detail: str = "") -> None:
        self.violations.append(Violation(kind=kind, cells=list(cells), detail=detail))

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def cells(self) -> list[str]:
        return sorted({c for v in self.violations for c in v.cells})


class ValidationResponse(BaseModel):
    valid: bool
    cell_count: int
    complex: ValidationReport
    dmf: Optional[ValidationReport] = None
