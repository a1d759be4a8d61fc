from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.models.validators import validate_cell_id

PairClass = Literal["off-diagonal", "diagonal", "essential"]


class PairEntry(BaseModel):
    """
    Punto del diagramma di persistenza: coppia nascita-morte con i suoi valori.
    """
    dim: int = Field(..., ge=0, description="Dimensione della cella di nascita")
    birth: str = Field(..., description="Cella di nascita")
    death: Optional[str] = Field(None, description="Cella di morte (null per i generatori essenziali)")
    birth_value: float
    death_value: Optional[float] = None
    pair_class: PairClass = Field(..., alias="class")

    model_config = {"populate_by_name": True}

    @field_validator('birth')
    @classmethod
    def check_birth(cls, v):
        return validate_cell_id(v)

    @model_validator(mode='after')
    def check_death(self):
        if (self.death is None) != (self.death_value is None):
            raise ValueError('Cella e valore di morte devono essere entrambi presenti o entrambi assenti')
        if (self.death is None) != (self.pair_class == "essential"):
            raise ValueError('Solo le coppie essenziali non hanno cella di morte')
        return self

    @property
    def persistence(self) -> float:
        if self.death_value is None:
            return float("inf")
        return self.death_value - self.birth_value


class RelationEntry(BaseModel):
    source: str = Field(..., description="Cella di nascita della coppia sorgente")
    target: str = Field(..., description="Cella di nascita della coppia destinazione")
    kind: Literal["hom", "cohom"]


class RegionEntry(BaseModel):
    pair: str = Field(..., description="Cella di nascita della coppia")
    death_region: list[list[float]] = Field(default_factory=list, description="Angoli della regione proibita per la morte")
    birth_region: list[list[float]] = Field(default_factory=list, description="Angoli della regione proibita per la nascita")


class DiagramDocument(BaseModel):
    """
    Diagramma di persistenza con relazioni e, facoltativamente, regioni proibite.
    """
    pairs: list[PairEntry] = Field(default_factory=list)
    relations: list[RelationEntry] = Field(default_factory=list)
    regions: Optional[list[RegionEntry]] = None

    @model_validator(mode='after')
    def check_partition(self):
        seen = set()
        for entry in self.pairs:
            for cell in (entry.birth, entry.death):
                if cell is None:
                    continue
                if cell in seen:
                    raise ValueError(f"La cella {cell} compare in piu coppie")
                seen.add(cell)
        births = {p.birth for p in self.pairs}
        dims = {p.birth: p.dim for p in self.pairs}
        for rel in self.relations:
            if rel.source not in births or rel.target not in births:
                raise ValueError(f"Relazione {rel.source} -> {rel.target} su coppie sconosciute")
            if dims[rel.source] != dims[rel.target]:
                raise ValueError(f"Relazione {rel.source} -> {rel.target} tra dimensioni diverse")
        return self
