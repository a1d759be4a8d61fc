"""
Shared Validation Functions
==========================

Description: Shared validation functions for Pydantic models
Version: 1.0.0

This module contains common validation functions that can be reused
across the document and request models.
"""

import math
import re
from typing import Any

_CELL_ID = re.compile(r'^\S+$')
FORMATS = ("json", "csv", "svg")
POLICIES = ("shallow-first-then-regions", "regions-only")


def validate_cell_id(v: Any) -> str:
    """Validate cell id - non empty, no whitespace"""
    if not isinstance(v, str) or not _CELL_ID.match(v):
        raise ValueError('Identificativo cella non valido: deve essere una stringa senza spazi')
    return v


def validate_dimension(v: Any) -> int:
    """Validate cell dimension - non negative integer"""
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ValueError('La dimensione di una cella deve essere un intero non negativo')
    return v


def validate_finite_value(v: Any) -> float:
    """Validate filter value - finite real number"""
    if v is None or not math.isfinite(float(v)):
        raise ValueError('I valori della funzione devono essere numeri reali finiti')
    return float(v)


def validate_policy(v: Any) -> str:
    """Validate simplification policy"""
    if v not in POLICIES:
        raise ValueError(f"Politica non supportata: {v} (ammesse: {', '.join(POLICIES)})")
    return v
