import pytest

from app.exceptions import BudgetExceededError, ValidationFailed
from app.models.diagram import PairEntry
from app.services.complex_service import validate_complex, validate_dmf
from app.services.document_service import diagram_from_state
from app.services.generator_service import bands_separated, random_complex, random_dmf, simplex_skeleton
from app.services.pairing_service import build_state
from app.services.vector_field_service import induced_vector_field


@pytest.mark.parametrize("d, cells", [(0, 1), (1, 3), (2, 7), (4, 31)])
def test_simplex_cell_count(d, cells):
    X = simplex_skeleton(d)
    assert len(X) == cells
    assert validate_complex(X).valid


def test_simplex_ids():
    X = simplex_skeleton(2)
    assert X.dim("0-1-2") == 2
    assert X.facets("0-1-2") == {"0-1", "0-2", "1-2"}
    assert sorted(X.cells_of_dim(0)) == ["0", "1", "2"]


def test_simplex_budget():
    with pytest.raises(ValidationFailed):
        simplex_skeleton(-1)
    with pytest.raises(BudgetExceededError):
        simplex_skeleton(13)


def test_random_dmf_is_deterministic():
    X = simplex_skeleton(3)
    assert random_dmf(X, 3) == random_dmf(X, 3)
    assert random_dmf(X, 3, banded=True) == random_dmf(X, 3, banded=True)


@pytest.mark.parametrize("seed", range(5))
def test_random_dmf_is_valid(seed):
    X = random_complex(seed)
    h = random_dmf(X, seed, vector_rate=0.5)
    assert validate_dmf(X, h).valid


def test_without_vectors_every_cell_is_critical():
    X = simplex_skeleton(3)
    h = random_dmf(X, 1)
    assert len(set(h.as_dict().values())) == len(X)
    assert not induced_vector_field(X, h).vectors


def test_vector_rate_one_ties_some_cells():
    X = simplex_skeleton(2)
    h = random_dmf(X, 0, vector_rate=1.0)
    assert validate_dmf(X, h).valid
    assert len(set(h.as_dict().values())) < len(X)


@pytest.mark.parametrize("seed", range(3))
def test_banded_values_separate_dimensions(seed):
    X = simplex_skeleton(3)
    h = random_dmf(X, seed, banded=True)
    for x, y in X.boundary_pairs():
        assert h(x) < h(y)
    assert max(h(c) for c in X.cells_of_dim(1)) < min(h(c) for c in X.cells_of_dim(2))
    assert bands_separated(diagram_from_state(build_state(X, h)).pairs)


def test_overlapping_bands():
    entries = [
        PairEntry(dim=0, birth="a", death="ab", birth_value=0, death_value=5, pair_class="off-diagonal"),
        PairEntry(dim=1, birth="bc", death="abc", birth_value=4, death_value=6, pair_class="off-diagonal"),
    ]
    assert not bands_separated(entries)
    assert bands_separated(entries[:1])
