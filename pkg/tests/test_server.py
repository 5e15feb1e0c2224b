import json
import time

import pytest
from fastapi.testclient import TestClient

from flowsim.demo import baseline_scenario, jobseeker_scenario
from flowsim.scenario import save_scenario
from flowsim.server import create_app


@pytest.fixture
def client(tmp_path):
    app = create_app(store_root=tmp_path / "store")
    with TestClient(app) as c:
        yield c


def small_doc(scenario, num_agents=40):
    scenario.parameters["num_agents"] = num_agents
    return json.loads(save_scenario(scenario))


def create(client, doc):
    resp = client.post("/api/scenarios", json=doc)
    assert resp.status_code == 201, resp.text
    return resp.json()["id"]


def wait_for(client, job_id, timeout=30.0):
    deadline = time.time() + timeout
    last = -1
    while time.time() < deadline:
        status = client.get(f"/api/runs/{job_id}/status").json()
        assert status["progress"]["completed_runs"] >= last  # monotone
        last = status["progress"]["completed_runs"]
        if status["state"] in ("completed", "failed"):
            return status
        time.sleep(0.02)
    raise TimeoutError(f"job {job_id} did not finish")


SETTINGS = {"duration_steps": 30, "iterations_per_scenario": 2, "collection_interval": 10}


def test_agent_types_and_parameters(client):
    types = client.get("/api/agent-types").json()
    assert [t["name"] for t in types] == ["migrant"]
    assert "seek_job" in types[0]["behaviors"]
    tags = {s["name"]: s["tag"] for s in types[0]["attribute_schema"]}
    assert tags == {"region": "region", "employed": "bool",
                    "savings": "real", "months_unemployed": "int"}
    params = client.get("/api/parameters").json()
    assert "num_agents" in params["schema"]


def test_geo_endpoint(client):
    resp = client.get("/api/geo")
    assert resp.status_code == 200
    assert resp.headers["content-type"].startswith("application/geo+json")
    assert len(resp.json()["features"]) == 8


def test_scenario_crud_happy_path(client):
    sid = create(client, small_doc(baseline_scenario()))
    listing = client.get("/api/scenarios").json()
    assert [s["id"] for s in listing] == [sid]

    read = client.get(f"/api/scenarios/{sid}")
    assert read.status_code == 200
    assert read.json()["name"] == "baseline"

    doc = small_doc(baseline_scenario())
    doc["description"] = "updated"
    assert client.put(f"/api/scenarios/{sid}", json=doc).status_code == 200
    assert client.get(f"/api/scenarios/{sid}").json()["description"] == "updated"

    assert client.delete(f"/api/scenarios/{sid}").status_code == 200
    assert client.get(f"/api/scenarios/{sid}").status_code == 404


def test_scenario_errors(client):
    assert client.get("/api/scenarios/sc-9999").status_code == 404
    assert client.delete("/api/scenarios/sc-9999").status_code == 404
    assert client.put("/api/scenarios/sc-9999", json=small_doc(baseline_scenario())).status_code == 404
    # malformed payloads
    assert client.post("/api/scenarios", content=b"{nope").status_code == 400
    assert client.post("/api/scenarios", json={"parameters": {}}).status_code == 400


def test_scenario_validate_endpoint(client):
    sid = create(client, small_doc(baseline_scenario()))
    resp = client.post(f"/api/scenarios/{sid}/validate")
    assert resp.status_code == 200
    assert resp.json() == {"valid": True, "diagnostics": []}

    doc = small_doc(jobseeker_scenario())
    doc["policies"][0]["actions"][0]["attribute"] = "karma"
    bad = create(client, doc)
    resp = client.post(f"/api/scenarios/{bad}/validate")
    assert resp.status_code == 422
    assert resp.json()["diagnostics"][0]["code"] == "unknown-attribute"

    assert client.post("/api/scenarios/sc-9999/validate").status_code == 404


def test_flow_upload_and_raw(client):
    raw = client.get("/api/flows/raw", params={"agent_type": "migrant"})
    assert raw.status_code == 200
    assert raw.headers["content-type"].startswith("application/xml")
    xml_text = raw.text
    assert xml_text.count("<node") == 4  # |behaviors| + 1

    up = client.post("/api/flows", params={"agent_type": "migrant"}, content=xml_text)
    assert up.status_code == 200
    body = up.json()
    assert body["diagnostics"] == []
    assert len(body["fingerprint"]) == 64

    bad = xml_text.replace("seek_job", "fly")
    resp = client.post("/api/flows", params={"agent_type": "migrant"}, content=bad)
    assert resp.status_code == 422
    assert any(d["code"] == "unresolved-behavior" for d in resp.json()["diagnostics"])

    assert client.post("/api/flows", content=b"<graphml").status_code == 422
    assert client.get("/api/flows/raw", params={"agent_type": "ghost"}).status_code == 404


def test_compare_endpoint(client):
    a = create(client, small_doc(baseline_scenario()))
    b = create(client, small_doc(jobseeker_scenario()))
    table = client.get("/api/compare", params={"ids": f"{a},{b}"}).json()
    assert table["columns"] == ["baseline", "jobseeker"]
    differing = [r for r in table["rows"] if r["differs"]]
    assert [(r["facet"], r["name"]) for r in differing] == [("policy", "Jobseeker Policy")]
    assert client.get("/api/compare", params={"ids": "nope"}).status_code == 404


def test_run_lifecycle_and_results(client):
    a = create(client, small_doc(baseline_scenario()))
    b = create(client, small_doc(jobseeker_scenario()))
    payload = {"scenario_ids": [a, b], "settings": SETTINGS, "base_seed": 7}
    resp = client.post("/api/runs", json=payload)
    assert resp.status_code == 201
    job_id = resp.json()["job_id"]

    status = wait_for(client, job_id)
    assert status["state"] == "completed"
    assert status["progress"] == {"completed_runs": 4, "total_runs": 4}
    assert status["sample_ticks"] == [0, 10, 20, 30]

    series = client.get(f"/api/runs/{job_id}/results",
                        params={"scenario": a, "reporter": "mean_savings"}).json()
    assert series["ticks"] == [0, 10, 20, 30]
    assert series["count"] == 2
    assert len(series["mean"]) == 4

    # choropleth happy path and consistency with total population
    cho = client.get(f"/api/runs/{job_id}/choropleth",
                     params={"reporter": "population_by_region", "tick": 30, "scenario": a})
    assert cho.status_code == 200
    values = cho.json()["values"]
    assert sum(values.values()) == pytest.approx(40.0)

    bad_tick = client.get(f"/api/runs/{job_id}/choropleth",
                          params={"reporter": "population_by_region", "tick": 13})
    assert bad_tick.status_code == 400
    assert bad_tick.json()["valid_ticks"] == [0, 10, 20, 30]

    assert client.get(f"/api/runs/{job_id}/results",
                      params={"scenario": "ghost", "reporter": "mean_savings"}).status_code == 404
    assert client.get("/api/runs/job-9999/status").status_code == 404


def test_run_request_errors(client):
    sid = create(client, small_doc(baseline_scenario()))
    assert client.post("/api/runs", json={"scenario_ids": ["ghost"], "settings": SETTINGS}).status_code == 404
    assert client.post("/api/runs", json={"scenario_ids": [sid]}).status_code == 400
    assert client.post("/api/runs", content=b"{nope").status_code == 400
    # scenario failing validation is rejected with diagnostics
    doc = small_doc(jobseeker_scenario())
    doc["policies"][0]["conditions"][0]["attribute"] = "karma"
    bad = create(client, doc)
    resp = client.post("/api/runs", json={"scenario_ids": [bad], "settings": SETTINGS, "base_seed": 1})
    assert resp.status_code == 422
    assert resp.json()["diagnostics"]


def test_results_before_completion_409(client):
    sid = create(client, small_doc(baseline_scenario(), num_agents=300))
    payload = {
        "scenario_ids": [sid],
        "settings": {"duration_steps": 400, "iterations_per_scenario": 8, "collection_interval": 100},
        "base_seed": 3,
    }
    job_id = client.post("/api/runs", json=payload).json()["job_id"]
    resp = client.get(f"/api/runs/{job_id}/results",
                      params={"scenario": sid, "reporter": "mean_savings"})
    if resp.status_code == 409:  # job may already be done on a fast machine
        assert "progress" in resp.json()
    wait_for(client, job_id)


def test_results_deterministic_across_resubmission(client):
    sid = create(client, small_doc(baseline_scenario()))
    payload = {"scenario_ids": [sid], "settings": SETTINGS, "base_seed": 99}
    payloads = []
    for _ in range(2):
        job_id = client.post("/api/runs", json=payload).json()["job_id"]
        wait_for(client, job_id)
        payloads.append(client.get(
            f"/api/runs/{job_id}/results",
            params={"scenario": sid, "reporter": "employment_rate"},
        ).content)
    assert payloads[0] == payloads[1]
