import json
import logging

import pytest
from click.testing import CliRunner

from app.cli import cli
from app.services.document_service import parse_complex, parse_diagram
from tests.conftest import HOLLOW_TRIANGLE, PATH_GRAPH


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def triangle_file(tmp_path):
    path = tmp_path / "triangle.json"
    path.write_text(json.dumps(HOLLOW_TRIANGLE))
    return str(path)


def test_validate(runner, triangle_file):
    result = runner.invoke(cli, ["validate", triangle_file])
    assert result.exit_code == 0
    assert json.loads(result.stdout)["valid"] is True


def test_validate_reports_violations(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({**HOLLOW_TRIANGLE, "values": {**HOLLOW_TRIANGLE["values"], "a": 9}}))
    result = runner.invoke(cli, ["validate", str(path)])
    assert result.exit_code == 1
    body = json.loads(result.stdout)
    assert body["valid"] is False
    assert body["dmf"]["violations"][0]["kind"] == "weak-monotonicity"


def test_pairs(runner, triangle_file):
    result = runner.invoke(cli, ["pairs", triangle_file])
    assert result.exit_code == 0
    doc = parse_diagram(result.stdout)
    assert [(p.birth, p.death) for p in doc.pairs] == [("a", None), ("b", "ab"), ("c", "bc"), ("ca", None)]
    assert doc.regions is None


def test_pairs_as_csv(runner, triangle_file):
    result = runner.invoke(cli, ["--format", "csv", "pairs", triangle_file])
    assert result.exit_code == 0
    assert result.stdout.splitlines()[0] == "dim,birth,death,birth_value,death_value,class"


def test_relations(runner, triangle_file):
    result = runner.invoke(cli, ["relations", triangle_file])
    assert json.loads(result.stdout) == [
        {"source": "b", "target": "a", "kind": "cohom"},
        {"source": "c", "target": "a", "kind": "cohom"},
    ]


def test_regions(runner, triangle_file):
    result = runner.invoke(cli, ["regions", triangle_file, "b"])
    assert result.exit_code == 0
    assert json.loads(result.stdout) == {"pair": "b", "death_region": [[0.0, 0.0]], "birth_region": [[4.0, 4.0]]}


def test_eligible(runner, triangle_file):
    result = runner.invoke(cli, ["eligible", triangle_file, "b,ab"])
    body = json.loads(result.stdout)
    assert body["eligible"] is True
    assert body["path_count"] == 1


def test_cancel_writes_the_new_document(runner, triangle_file, tmp_path):
    out = tmp_path / "out.json"
    result = runner.invoke(cli, ["cancel", triangle_file, "ab", "-o", str(out)])
    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    assert report["pair"]["birth"] == "b"
    assert report["path"] == ["b", "ab"]
    X, h = parse_complex(out.read_text())
    assert len(X) == 6
    assert h("b") == h("ab")


def test_cancel_essential_pair_fails(runner, triangle_file):
    result = runner.invoke(cli, ["cancel", triangle_file, "a"])
    assert result.exit_code == 1
    assert "Error:" in result.stderr


def test_unknown_pair(runner, triangle_file):
    result = runner.invoke(cli, ["regions", triangle_file, "b,bc"])
    assert result.exit_code == 1
    assert "not a birth-death pair" in result.stderr


def test_simplify(runner, triangle_file):
    result = runner.invoke(cli, ["simplify", triangle_file])
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert [e["birth"] for e in report["standard_cancelled"]] == ["b", "c"]
    assert report["not_cancellable"] == []


def test_reduce_draws_values_when_missing(runner, tmp_path):
    path = tmp_path / "cells.json"
    path.write_text(json.dumps({"cells": PATH_GRAPH["cells"]}))
    first = runner.invoke(cli, ["--seed", "4", "reduce", str(path)])
    second = runner.invoke(cli, ["--seed", "4", "reduce", str(path)])
    assert first.exit_code == 0
    assert first.stdout == second.stdout
    assert len(parse_diagram(first.stdout).pairs) == 3


def test_random_dmf_on_a_simplex(runner):
    result = runner.invoke(cli, ["random-dmf", "--simplex", "2", "--banded"])
    assert result.exit_code == 0
    X, h = parse_complex(result.stdout)
    assert len(X) == 7
    assert h is not None


def test_random_dmf_needs_one_source(runner, triangle_file):
    result = runner.invoke(cli, ["random-dmf", triangle_file, "--simplex", "2"])
    assert result.exit_code == 2


def test_experiment(runner):
    result = runner.invoke(cli, ["experiment", "--d", "2", "--seeds", "0", "--seeds", "1"])
    assert result.exit_code == 0
    reports = json.loads(result.stdout)
    assert [r["seed"] for r in reports] == [0, 1]
    assert all(r["cells"] == 7 for r in reports)
