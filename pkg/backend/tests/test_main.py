import json
import math

import pytest
from fastapi.testclient import TestClient

from cpint.config import settings
from cpint.constants import APP_VERSION
from cpint.main import app


@pytest.fixture
def client():
    return TestClient(app)


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "app": settings.app_name, "version": APP_VERSION}


def test_integrate_an_expression(client):
    response = client.post("/integrate", json={"primitive": "x^3", "a": "0", "b": "1"})
    assert response.status_code == 200
    body = response.json()
    assert body["value"] == pytest.approx(1.0)
    assert body["divergent"] is False


def test_integrate_a_fixture_over_the_line(client):
    response = client.post("/integrate", json={"fixture": "arctan"})
    assert response.status_code == 200
    assert response.json()["value"] == pytest.approx(math.pi, abs=1e-9)


def test_bad_expression_is_unprocessable(client):
    response = client.post("/integrate", json={"primitive": "x +", "a": "0", "b": "1"})
    assert response.status_code == 422
    with open(settings.error_log_path, encoding="utf-8") as f:
        record = json.loads(f.readline())
    assert record["message"] == "integrate failed"
    assert record["extra"]["type"] == "ExpressionSyntaxError"


def test_unknown_fixture_is_unprocessable(client):
    response = client.post("/integrate", json={"fixture": "nothing_here"})
    assert response.status_code == 422


def test_abs_norm(client):
    response = client.post("/norm", json={"fixture": "sin_bump", "kind": "abs"})
    assert response.status_code == 200
    assert response.json()["value"] == pytest.approx(4.0, abs=1e-9)


def test_poisson(client):
    response = client.post("/poisson", json={"fixture": "indicator_ramp", "points": [[0.0, 1.0]]})
    assert response.status_code == 200
    assert response.json()["values"] == [pytest.approx(0.5, abs=1e-8)]


def test_laplace(client):
    response = client.post("/laplace", json={"fixture": "exp_decay", "points": [[1.0, 0.0]]})
    assert response.status_code == 200
    re_z, im_z = response.json()["values"][0]
    assert re_z == pytest.approx(0.5, abs=1e-8)
    assert im_z == pytest.approx(0.0, abs=1e-8)


def test_converge_serializes_infinite_points(client):
    response = client.post("/converge", json={"fixture": "traveling_block", "modes": ["integral"], "n_max": 4})
    assert response.status_code == 200
    verdict = response.json()["verdicts"][0]
    assert verdict["mode"] == "integral"
    assert verdict["verdict"] == "fails"
    assert {row["x"] for row in verdict["evidence"]} == {"inf"}


def test_list_fixtures(client):
    response = client.get("/fixtures")
    assert response.status_code == 200
    kinds = {item["name"]: item["kind"] for item in response.json()["fixtures"]}
    assert kinds["atan_expr"] == "primitive"
    assert kinds["unit_block"] == "bv"
    assert kinds["power_ramp"] == "sequence"


def test_run_log_endpoint(client):
    assert client.get("/logs/runs").text == ""
    client.post("/integrate", json={"primitive": "x^3", "a": "0", "b": "1"})
    lines = client.get("/logs/runs").text.splitlines()
    event = json.loads(lines[-1])
    assert event["endpoint"] == "integrate"
    assert event["status"] == 200


def test_weighted_integral_endpoint(client):
    response = client.post("/weighted", json={"primitive": "x", "r": 1.0})
    assert response.status_code == 200
    assert response.json()["value"] == pytest.approx(1.0, abs=1e-9)


def test_weighted_integral_accepts_a_growing_weight(client):
    response = client.post("/weighted", json={"primitive": "1-exp(-2*x)", "r": -1.0})
    assert response.status_code == 200
    assert response.json()["value"] == pytest.approx(2.0, abs=1e-6)


def test_weighted_integral_without_a_limit_is_unprocessable(client):
    response = client.post("/weighted", json={"primitive": "x", "r": 0.0})
    assert response.status_code == 422
    with open(settings.error_log_path, encoding="utf-8") as f:
        record = json.loads(f.readline())
    assert record["extra"]["type"] == "NoLimitAtInfinity"


def test_weighted_laplace_endpoint(client):
    response = client.post("/weighted", json={"primitive": "exp(x)", "r": 1.5, "points": [[2.0, 0.0]]})
    assert response.status_code == 200
    body = response.json()
    assert body["value"] is None
    re_z, im_z = body["values"][0]
    assert re_z == pytest.approx(1.0, abs=1e-8)
    assert im_z == pytest.approx(0.0, abs=1e-8)


def test_weighted_laplace_left_of_the_weight_is_unprocessable(client):
    response = client.post("/weighted", json={"primitive": "exp(x)", "r": 1.5, "points": [[1.0, 0.0]]})
    assert response.status_code == 422
