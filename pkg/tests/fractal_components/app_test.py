import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from app import app

EVENTS = Path(__file__).parents[1] / "events"

client = TestClient(app)


def load_event(name: str) -> dict:
    with open(EVENTS / name) as event:
        return json.load(event)


### --- Service Components --- ###
def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "Online"}


def test_classify():
    response = client.post("/classify", json=load_event("ClassifyRequest.json"))
    assert response.status_code == 200
    verdict = response.json()
    expected = load_event("ClassifyVerdict.json")
    assert {key: verdict[key] for key in expected} == expected
    assert verdict["witness"]["margin"] > 0


def test_classify_member():
    response = client.post("/classify", json={"fn": "mono(s)", "grid_n": 8, "random_trials": 500})
    assert response.json()["status"] == "proven_member"


def test_classify_bad_expression():
    response = client.post("/classify", json={"fn": "mono(x)"})
    assert response.status_code == 400
    assert "'x'" in response.json()["detail"]


def test_classify_bad_alpha():
    response = client.post("/classify", json={"fn": "mono(s)", "alpha": 2.0})
    assert response.status_code == 422


def test_classify_missing_function():
    assert client.post("/classify", json={}).status_code == 422


# --- Calculus --- #
def test_calc_integrate():
    response = client.post("/calc/integrate", json=load_event("CalcRequest.json"))
    assert response.status_code == 200
    assert response.json()["value"] == pytest.approx(0.7978846, abs=1e-4)


def test_calc_unknown_operation():
    assert client.post("/calc/laplace", json=load_event("CalcRequest.json")).status_code == 404


def test_calc_ftc_at_anchor():
    response = client.post("/calc/ftc", json={"fn": "mono(1)", "x0": 0.0})
    assert response.status_code == 400


def test_calc_ratio_limit_without_g():
    response = client.post("/calc/ratio-limit", json={"fn": "mono(1)"})
    assert response.status_code == 400


# --- Theorems, sandwich and examples --- #
def test_theorems():
    response = client.post("/theorems", json=load_event("TheoremsRequest.json"))
    assert response.status_code == 200
    reports = response.json()
    assert {r["theorem_id"] for r in reports} == {"thm35", "thm36a"}
    assert all(r["conclusion_status"] != "falsified" for r in reports)


def test_theorems_unknown_suite():
    assert client.post("/theorems", json={"suite": "thm99"}).status_code == 400


def test_theorems_missing_corpus():
    response = client.post("/theorems", json={"suite": "thm31a", "corpus": "/nonexistent/corpus.txt"})
    assert response.status_code == 400


def test_sandwich():
    response = client.post("/sandwich", json={"fn": "mono(1)", "n_points": 4})
    assert response.status_code == 200
    report = response.json()
    assert report["holds"]
    assert [row["u"] for row in report["rows"]] == [1.0, 2.0, 3.0, 4.0]


def test_examples():
    response = client.get("/examples", params={"which": "4.1"})
    assert response.status_code == 200
    result = response.json()
    assert result["example41"]["expected"]["cases"] == ["i", "ii", "iv"]
    assert result["example41"]["second"]["status"] == "violation"
    assert "matrix" not in result


def test_examples_bad_k():
    response = client.get("/examples", params={"which": "4.2", "k": 0.5})
    assert response.status_code == 400
