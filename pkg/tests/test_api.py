"""Tests for the HTTP surface"""

import pytest
from fastapi.testclient import TestClient

from src.api import app


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_flatten(client):
    response = client.post("/api/v1/flatten", json={"spec": "F[1,20](G[1,5](R1) & F[6,15](R2)) & G[1,35](!R3)"})
    assert response.status_code == 200
    doc = response.json()
    assert [c["id"] for c in doc["inv"]] == ["c1", "c3"]
    assert {b["var"] for b in doc["tc"]} == {"t1", "t2"}


def test_resolve(client):
    response = client.post("/api/v1/resolve", json={"spec": "F[0,15](R1 & F[0,15](R2))"})
    assert response.status_code == 200
    doc = response.json()
    assert set(doc["sat_vars"]) == {"c1", "c2"}
    assert doc["tc_prime"]


def test_monitor(client):
    response = client.post("/api/v1/monitor", json={"spec": "G[0,3](x >= 3.0)",
                                                     "channels": {"x": [3.0, 2.5, 3.0, 3.5]}})
    assert response.status_code == 200
    assert response.json() == {"robustness": -0.5, "satisfied": False, "t": 0}


def test_monitor_needs_channels(client):
    response = client.post("/api/v1/monitor", json={"spec": "x > 0", "channels": {}})
    assert response.status_code == 400


def test_bad_spec_is_a_client_error(client):
    response = client.post("/api/v1/flatten", json={"spec": "F[0,5](R1"})
    assert response.status_code == 400
    assert "line 1" in response.json()["detail"]


def test_run_returns_plan(client):
    response = client.post("/api/v1/run", json={"spec": "F[0,8](R1)", "initial_state": [5, 1, 0, 0]})
    assert response.status_code == 200
    body = response.json()
    assert body["report"]["status"] == "success"
    first = body["trajectory"][0]
    assert (first["step"], first["px"], first["py"], first["vx"], first["vy"]) == (0, 5.0, 1.0, 0.0, 0.0)
    assert {"ux", "uy"} <= set(first)
    assert "ux" not in body["trajectory"][-1]
    assert body["trace"]
