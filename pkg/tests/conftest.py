"""
Shared fixtures: three small complexes with known diagrams and a factory of
random states.
"""

import pytest

from app.services.complex_service import DiscreteMorseFunction, LefschetzComplex
from app.services.generator_service import random_complex, random_dmf
from app.services.morse_state import MorseState

HOLLOW_TRIANGLE = {
    "cells": [
        {"id": "a", "dim": 0, "facets": []},
        {"id": "b", "dim": 0, "facets": []},
        {"id": "c", "dim": 0, "facets": []},
        {"id": "ab", "dim": 1, "facets": ["a", "b"]},
        {"id": "bc", "dim": 1, "facets": ["b", "c"]},
        {"id": "ca", "dim": 1, "facets": ["c", "a"]},
    ],
    "values": {"a": 0, "b": 1, "c": 2, "ab": 3, "bc": 4, "ca": 5},
}

# u - v - w with the vector (v, wv)
PATH_GRAPH = {
    "cells": [
        {"id": "u", "dim": 0, "facets": []},
        {"id": "v", "dim": 0, "facets": []},
        {"id": "w", "dim": 0, "facets": []},
        {"id": "uv", "dim": 1, "facets": ["u", "v"]},
        {"id": "wv", "dim": 1, "facets": ["w", "v"]},
    ],
    "values": {"u": 0, "w": 1, "v": 2, "wv": 2, "uv": 3},
}

SEGMENT = {
    "cells": [
        {"id": "a", "dim": 0, "facets": []},
        {"id": "b", "dim": 0, "facets": []},
        {"id": "ab", "dim": 1, "facets": ["a", "b"]},
    ],
    "values": {"a": 0, "b": 1, "ab": 1},
}


def build(doc: dict) -> tuple[LefschetzComplex, DiscreteMorseFunction]:
    X = LefschetzComplex({c["id"]: c["dim"] for c in doc["cells"]}, {c["id"]: c["facets"] for c in doc["cells"]})
    return X, DiscreteMorseFunction(doc["values"])


@pytest.fixture
def hollow_triangle():
    return build(HOLLOW_TRIANGLE)


@pytest.fixture
def path_graph():
    return build(PATH_GRAPH)


@pytest.fixture
def segment():
    return build(SEGMENT)


@pytest.fixture
def triangle_state(hollow_triangle):
    return MorseState.build(*hollow_triangle)


@pytest.fixture
def path_state(path_graph):
    return MorseState.build(*path_graph)


@pytest.fixture
def random_state():
    def factory(seed: int, vector_rate: float = 0.0, **kwargs) -> MorseState:
        X = random_complex(seed, **kwargs)
        return MorseState.build(X, random_dmf(X, seed, vector_rate=vector_rate))
    return factory
