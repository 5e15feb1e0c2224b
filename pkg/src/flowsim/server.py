"""HTTP service: scenario CRUD, flow upload/generation, batch launch with
progress polling, aggregate results, choropleth frames and comparison.

The scenario store is directory-backed (one JSON file per scenario, flows
content-addressed by fingerprint) so CLI and server results interoperate.
Batches run on background worker threads; job state is polled.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from flowsim.batch import (
    ModelBundle,
    RunResult,
    aggregate,
    execute_batch,
    plan_batch,
    sample_ticks,
)
from flowsim.demo import build_demo_bundle
from flowsim.flows import FlowParseError, generate_raw_flow, parse_graphml, serialize_graphml, validate_flow
from flowsim.scenario import (
    Scenario,
    ScenarioError,
    SimulationSettings,
    compare,
    flow_fingerprint,
    load_scenario,
    save_scenario,
    validate_scenario,
)


@dataclass
class JobRecord:
    job_id: str
    state: str  # queued | running | completed | failed
    total_runs: int
    completed_runs: int
    created_at: float
    settings: SimulationSettings
    scenario_ids: list[str]
    base_seed: int
    error: str = ""
    results: list[RunResult] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "job_id": self.job_id,
            "state": self.state,
            "progress": {"completed_runs": self.completed_runs, "total_runs": self.total_runs},
            "created_at": self.created_at,
            "settings": self.settings.to_json(),
            "scenario_ids": self.scenario_ids,
            "base_seed": self.base_seed,
            "sample_ticks": sample_ticks(self.settings.duration_steps, self.settings.collection_interval),
            "error": self.error,
        }


class ScenarioStore:
    """One JSON file per scenario under <root>/scenarios, flows
    content-addressed under <root>/flows."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "scenarios").mkdir(parents=True, exist_ok=True)
        (self.root / "flows").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, scenario_id: str) -> Path:
        return self.root / "scenarios" / f"{scenario_id}.json"

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "scenarios").glob("*.json"))

    def next_id(self) -> str:
        existing = self.list_ids()
        n = 1
        while f"sc-{n:04d}" in existing:
            n += 1
        return f"sc-{n:04d}"

    def save(self, scenario_id: str, doc: dict) -> None:
        with self._lock:
            self._path(scenario_id).write_text(
                json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )

    def read_doc(self, scenario_id: str) -> dict | None:
        path = self._path(scenario_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def load(self, scenario_id: str) -> Scenario | None:
        doc = self.read_doc(scenario_id)
        if doc is None:
            return None
        return load_scenario(json.dumps(doc), base_dir=self.root)

    def delete(self, scenario_id: str) -> bool:
        with self._lock:
            path = self._path(scenario_id)
            if not path.exists():
                return False
            path.unlink()
            return True

    def store_flow(self, xml_text: str) -> str:
        flow = parse_graphml(xml_text)
        fp = flow_fingerprint(flow)
        (self.root / "flows" / f"{fp}.graphml").write_text(xml_text, encoding="utf-8")
        return fp


def create_app(bundle: ModelBundle | None = None, store_root: str | Path = "flowsim-store") -> FastAPI:
    bundle = bundle or build_demo_bundle()
    store = ScenarioStore(store_root)
    jobs: dict[str, JobRecord] = {}
    jobs_lock = threading.Lock()
    app = FastAPI(title="flowsim", version="0.1.0")

    def error(status: int, message: str, **extra) -> JSONResponse:
        return JSONResponse({"error": message, **extra}, status_code=status)

    def scenario_diagnostics(s: Scenario) -> list[dict]:
        diags = validate_scenario(s, bundle.type_defs, bundle.parameter_schema)
        return [d.to_json() for d in diags]

    # ---- model metadata -------------------------------------------------

    @app.get("/api/agent-types")
    def agent_types():
        return [
            {
                "name": td.name,
                "attribute_schema": [
                    {"name": s.name, "tag": s.tag, "default": s.default}
                    for s in td.attribute_schema
                ],
                "behaviors": list(td.behaviors),
            }
            for td in bundle.type_defs
        ]

    @app.get("/api/parameters")
    def parameters():
        return {
            "schema": bundle.parameter_schema,
            "defaults": bundle.default_parameters,
        }

    @app.get("/api/geo")
    def geo():
        if bundle.geojson is None:
            return error(404, "no region geometry available")
        return Response(json.dumps(bundle.geojson), media_type="application/geo+json")

    # ---- scenarios -------------------------------------------------------

    @app.get("/api/scenarios")
    def list_scenarios():
        out = []
        for sid in store.list_ids():
            doc = store.read_doc(sid)
            out.append({"id": sid, "name": doc.get("name", ""), "description": doc.get("description", "")})
        return out

    @app.post("/api/scenarios", status_code=201)
    async def create_scenario(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return error(400, "request body is not valid JSON")
        try:
            load_scenario(json.dumps(payload), base_dir=store.root)
        except (ScenarioError, ValueError) as e:
            return error(400, f"malformed scenario: {e}")
        sid = store.next_id()
        store.save(sid, payload)
        return {"id": sid}

    @app.get("/api/scenarios/{scenario_id}")
    def read_scenario(scenario_id: str):
        doc = store.read_doc(scenario_id)
        if doc is None:
            return error(404, f"unknown scenario {scenario_id!r}")
        return {"id": scenario_id, **doc}

    @app.put("/api/scenarios/{scenario_id}")
    async def update_scenario(scenario_id: str, request: Request):
        if store.read_doc(scenario_id) is None:
            return error(404, f"unknown scenario {scenario_id!r}")
        try:
            payload = await request.json()
        except Exception:
            return error(400, "request body is not valid JSON")
        try:
            load_scenario(json.dumps(payload), base_dir=store.root)
        except (ScenarioError, ValueError) as e:
            return error(400, f"malformed scenario: {e}")
        store.save(scenario_id, payload)
        return {"id": scenario_id}

    @app.delete("/api/scenarios/{scenario_id}")
    def delete_scenario(scenario_id: str):
        if not store.delete(scenario_id):
            return error(404, f"unknown scenario {scenario_id!r}")
        return {"deleted": scenario_id}

    @app.post("/api/scenarios/{scenario_id}/validate")
    def validate_stored_scenario(scenario_id: str):
        scenario = store.load(scenario_id)
        if scenario is None:
            return error(404, f"unknown scenario {scenario_id!r}")
        diags = scenario_diagnostics(scenario)
        if diags:
            return JSONResponse({"valid": False, "diagnostics": diags}, status_code=422)
        return {"valid": True, "diagnostics": []}

    # ---- flows -----------------------------------------------------------

    @app.post("/api/flows")
    async def upload_flow(request: Request, agent_type: str = ""):
        xml_text = (await request.body()).decode("utf-8", errors="replace")
        try:
            flow = parse_graphml(xml_text, agent_type=agent_type)
        except FlowParseError as e:
            return error(422, str(e), diagnostics=[{"code": "parse-error", "message": str(e), "where": ""}])
        td = next((t for t in bundle.type_defs if t.name == (agent_type or flow.agent_type)), None)
        diags = [d.to_json() for d in validate_flow(flow, td)]
        if diags:
            return JSONResponse({"fingerprint": flow_fingerprint(flow), "diagnostics": diags}, status_code=422)
        fp = store.store_flow(xml_text)
        return {"fingerprint": fp, "diagnostics": []}

    @app.get("/api/flows/raw")
    def raw_flow(agent_type: str):
        td = next((t for t in bundle.type_defs if t.name == agent_type), None)
        if td is None:
            return error(404, f"unknown agent type {agent_type!r}")
        xml_text = serialize_graphml(generate_raw_flow(td))
        return Response(xml_text, media_type="application/xml")

    # ---- comparison ------------------------------------------------------

    @app.get("/api/compare")
    def compare_scenarios(ids: str = Query(...)):
        id_list = [s for s in ids.split(",") if s]
        scenarios = []
        for sid in id_list:
            scenario = store.load(sid)
            if scenario is None:
                return error(404, f"unknown scenario {sid!r}")
            scenarios.append(scenario)
        if not scenarios:
            return error(400, "no scenario ids given")
        return compare(scenarios).to_json()

    # ---- runs ------------------------------------------------------------

    def run_job(job: JobRecord, scenarios: list[Scenario]) -> None:
        with jobs_lock:
            job.state = "running"

        def progress(done: int, total: int) -> None:
            with jobs_lock:
                job.completed_runs = done

        try:
            specs = plan_batch(scenarios, job.settings, job.base_seed)
            results = execute_batch(
                specs,
                scenarios,
                bundle,
                parallelism=4,
                store_root=store.root / "jobs" / job.job_id,
                progress=progress,
            )
            with jobs_lock:
                job.results = results
                job.state = "failed" if all(r.status == "failed" for r in results) else "completed"
                if job.state == "failed":
                    job.error = results[0].reason if results else "no runs"
        except Exception as e:
            with jobs_lock:
                job.state = "failed"
                job.error = f"{type(e).__name__}: {e}"

    @app.post("/api/runs", status_code=201)
    async def submit_runs(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return error(400, "request body is not valid JSON")
        try:
            scenario_ids = list(payload["scenario_ids"])
            settings = SimulationSettings.from_json(payload["settings"])
            base_seed = int(payload.get("base_seed", 0))
        except (KeyError, TypeError, ValueError, ScenarioError) as e:
            return error(400, f"malformed run request: {e}")
        scenarios = []
        for sid in scenario_ids:
            scenario = store.load(sid)
            if scenario is None:
                return error(404, f"unknown scenario {sid!r}")
            diags = scenario_diagnostics(scenario)
            if diags:
                return JSONResponse(
                    {"error": f"scenario {sid!r} has diagnostics", "diagnostics": diags},
                    status_code=422,
                )
            scenarios.append(scenario)
        if not scenarios:
            return error(400, "scenario_ids is empty")
        with jobs_lock:
            job_id = f"job-{len(jobs) + 1:04d}"
            job = JobRecord(
                job_id=job_id,
                state="queued",
                total_runs=len(scenarios) * settings.iterations_per_scenario,
                completed_runs=0,
                created_at=time.time(),
                settings=settings,
                scenario_ids=scenario_ids,
                base_seed=base_seed,
            )
            jobs[job_id] = job
        threading.Thread(target=run_job, args=(job, scenarios), daemon=True).start()
        return {"job_id": job_id}

    def get_job(job_id: str) -> JobRecord | None:
        with jobs_lock:
            return jobs.get(job_id)

    @app.get("/api/runs/{job_id}/status")
    def job_status(job_id: str):
        job = get_job(job_id)
        if job is None:
            return error(404, f"unknown job {job_id!r}")
        with jobs_lock:
            return job.to_json()

    def job_scenario_results(job: JobRecord, scenario_id: str) -> list[RunResult] | None:
        if scenario_id not in job.scenario_ids:
            return None
        index = job.scenario_ids.index(scenario_id)
        return [r for r in job.results if r.spec.scenario_index == index]

    @app.get("/api/runs/{job_id}/results")
    def job_results(job_id: str, scenario: str = Query(...), reporter: str = Query(...)):
        job = get_job(job_id)
        if job is None:
            return error(404, f"unknown job {job_id!r}")
        with jobs_lock:
            if job.state not in ("completed", "failed"):
                return error(
                    409,
                    "job not finished",
                    progress={"completed_runs": job.completed_runs, "total_runs": job.total_runs},
                )
            results = job_scenario_results(job, scenario)
        if results is None:
            return error(404, f"scenario {scenario!r} is not part of job {job_id!r}")
        completed = [r for r in results if r.status == "completed"]
        if not completed:
            return error(404, f"no completed runs for scenario {scenario!r}")
        if reporter not in completed[0].columns:
            return error(404, f"unknown reporter column {reporter!r}", columns=completed[0].columns)
        return aggregate(completed, reporter).to_json()

    @app.get("/api/runs/{job_id}/choropleth")
    def job_choropleth(
        job_id: str,
        reporter: str = Query(...),
        tick: int = Query(...),
        scenario: str = "",
    ):
        job = get_job(job_id)
        if job is None:
            return error(404, f"unknown job {job_id!r}")
        with jobs_lock:
            if job.state not in ("completed", "failed"):
                return error(
                    409,
                    "job not finished",
                    progress={"completed_runs": job.completed_runs, "total_runs": job.total_runs},
                )
            scenario_id = scenario or job.scenario_ids[0]
            results = job_scenario_results(job, scenario_id)
        if results is None:
            return error(404, f"scenario {scenario_id!r} is not part of job {job_id!r}")
        rep = next((r for r in bundle.reporters if r.name == reporter), None)
        if rep is None or rep.kind != "per_region":
            return error(404, f"{reporter!r} is not a per-region reporter")
        valid = sample_ticks(job.settings.duration_steps, job.settings.collection_interval)
        if tick not in valid:
            return error(400, f"tick {tick} not in the sampled tick set", valid_ticks=valid)
        completed = [r for r in results if r.status == "completed"]
        if not completed:
            return error(404, f"no completed runs for scenario {scenario_id!r}")
        prefix = f"{reporter}/"
        regions = sorted(
            c[len(prefix):] for c in completed[0].columns if c.startswith(prefix)
        )
        values: dict[str, float] = {}
        for region in regions:
            col = f"{reporter}/{region}"
            vals = [
                dict(r.samples)[tick][col]
                for r in completed
            ]
            values[region] = sum(vals) / len(vals)
        return {"reporter": reporter, "tick": tick, "statistic": "mean", "values": values}

    return app
