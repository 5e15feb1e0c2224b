"""Batch execution: scenarios x iterations with reproducible derived seeds.

Each (scenario_index, iteration_index) pair gets a 64-bit seed derived
from the base seed by a fixed SHA-256 mix, so plans are stable across
planner runs and streams are statistically independent. Results persist
as one directory per run: meta.json plus samples.csv (header: tick, then
one column per reporter; per-region reporters expand to one column per
region, named "<reporter>/<region_id>").
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import struct
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from flowsim.flows import bind
from flowsim.kernel import AgentTypeDef, ModelState, create_model, step
from flowsim.scenario import Scenario, SimulationSettings


class BatchError(Exception):
    pass


class ResultNotFound(BatchError):
    pass


def derive_seed(base_seed: int, scenario_index: int, iteration_index: int) -> int:
    """Fixed 64-bit seed mix: first 8 bytes (big-endian) of
    SHA-256(base_seed || scenario_index || iteration_index), each packed
    as a signed/unsigned 64-bit big-endian integer."""
    blob = struct.pack(">qQQ", base_seed, scenario_index, iteration_index)
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


def sample_ticks(duration: int, interval: int) -> list[int]:
    """{0, k, 2k, ...} up to duration, plus the final tick itself."""
    ticks = list(range(0, duration + 1, interval))
    if ticks[-1] != duration:
        ticks.append(duration)
    return ticks


@dataclass(frozen=True)
class RunSpec:
    scenario_id: str
    scenario_index: int
    iteration_index: int
    seed: int
    settings: SimulationSettings

    @property
    def run_id(self) -> str:
        return f"s{self.scenario_index:03d}-i{self.iteration_index:03d}-{_slug(self.scenario_id)}"

    def to_json(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "scenario_index": self.scenario_index,
            "iteration_index": self.iteration_index,
            "seed": self.seed,
            "settings": self.settings.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RunSpec":
        return cls(
            scenario_id=doc["scenario_id"],
            scenario_index=doc["scenario_index"],
            iteration_index=doc["iteration_index"],
            seed=doc["seed"],
            settings=SimulationSettings.from_json(doc["settings"]),
        )


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in text)[:60]


@dataclass(frozen=True)
class Reporter:
    """Pure read-only aggregation over model state.

    kind "scalar": evaluator returns one number. kind "per_region":
    evaluator returns a map region_id -> number, flattened into columns
    "<name>/<region_id>" in sample tables.
    """

    name: str
    kind: str  # "scalar" | "per_region"
    evaluator: Callable[[ModelState], Any]


@dataclass
class RunResult:
    run_id: str
    spec: RunSpec
    # one row per sample: (tick, {column -> value}), flattened columns
    samples: list[tuple[int, dict[str, float]]]
    status: str  # "completed" | "failed"
    reason: str = ""
    wall_time: float = 0.0

    @property
    def columns(self) -> list[str]:
        return list(self.samples[0][1]) if self.samples else []


@dataclass
class AggregateSeries:
    scenario_id: str
    reporter: str
    ticks: list[int]
    mean: list[float]
    std: list[float]  # population std (divisor n)
    min: list[float]
    max: list[float]
    count: int

    def to_json(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "reporter": self.reporter,
            "ticks": self.ticks,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "count": self.count,
        }


@dataclass
class ModelBundle:
    """Everything the engine needs to build a model for a scenario: type
    definitions, parameter schema and defaults, regions, reporters, and a
    rule deriving the initial population from the parameters."""

    type_defs: list[AgentTypeDef]
    parameter_schema: dict[str, str]
    default_parameters: dict[str, Any]
    regions: dict[str, dict[str, Any]]
    reporters: list[Reporter]
    population: Callable[[dict[str, Any]], dict[str, int]]
    geojson: dict | None = None

    def reporter(self, name: str) -> Reporter:
        for r in self.reporters:
            if r.name == name:
                return r
        raise KeyError(name)


def plan_batch(
    scenarios: list[Scenario],
    settings: SimulationSettings,
    base_seed: int,
) -> list[RunSpec]:
    """|scenarios| x iterations specs with pairwise-distinct derived seeds."""
    if not scenarios:
        raise BatchError("cannot plan a batch over an empty scenario list")
    specs = []
    for si, scenario in enumerate(scenarios):
        for ii in range(settings.iterations_per_scenario):
            specs.append(
                RunSpec(
                    scenario_id=scenario.name,
                    scenario_index=si,
                    iteration_index=ii,
                    seed=derive_seed(base_seed, si, ii),
                    settings=settings,
                )
            )
    return specs


def _sample(model: ModelState, reporters: list[Reporter]) -> dict[str, float]:
    row: dict[str, float] = {}
    for r in reporters:
        value = r.evaluator(model)
        if r.kind == "per_region":
            for region_id in sorted(value):
                row[f"{r.name}/{region_id}"] = value[region_id]
        else:
            row[r.name] = value
    return row


def execute_run(spec: RunSpec, scenario: Scenario, bundle: ModelBundle) -> RunResult:
    """Build the model with the spec's derived seed, step it for the full
    duration and sample reporters on the collection grid (final tick
    always included). Behavior or policy errors mark the run failed and
    keep the partial samples."""
    started = time.perf_counter()
    params = dict(bundle.default_parameters)
    params.update(scenario.parameters)
    ticks = set(sample_ticks(spec.settings.duration_steps, spec.settings.collection_interval))
    samples: list[tuple[int, dict[str, float]]] = []
    status, reason = "completed", ""
    try:
        model = create_model(
            type_defs=bundle.type_defs,
            parameters=params,
            population_spec=bundle.population(params),
            seed=spec.seed,
            regions=bundle.regions,
        )
        bound = {
            t: bind(flow, model.type_defs[t])
            for t, flow in scenario.flows.items()
            if t in model.type_defs
        }
        if 0 in ticks:
            samples.append((0, _sample(model, bundle.reporters)))
        for _ in range(spec.settings.duration_steps):
            step(model, bound, scenario.policies)
            if model.tick in ticks:
                samples.append((model.tick, _sample(model, bundle.reporters)))
    except Exception as e:  # failed runs never abort a batch
        status, reason = "failed", f"{type(e).__name__}: {e}"
    return RunResult(
        run_id=spec.run_id,
        spec=spec,
        samples=samples,
        status=status,
        reason=reason,
        wall_time=time.perf_counter() - started,
    )


def execute_batch(
    specs: list[RunSpec],
    scenarios: list[Scenario],
    bundle: ModelBundle,
    parallelism: int = 1,
    store_root: str | Path | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> list[RunResult]:
    """Execute all specs on a bounded worker pool. Result content is
    independent of parallelism; the returned list is ordered by
    (scenario_index, iteration_index)."""
    if parallelism < 1:
        raise BatchError("parallelism must be >= 1")
    by_index = {i: s for i, s in enumerate(scenarios)}
    done = 0
    lock = threading.Lock()

    def work(spec: RunSpec) -> RunResult:
        nonlocal done
        result = execute_run(spec, by_index[spec.scenario_index], bundle)
        if store_root is not None:
            persist_result(result, store_root)
        with lock:
            done += 1
            if progress is not None:
                progress(done, len(specs))
        return result

    ordered = sorted(specs, key=lambda s: (s.scenario_index, s.iteration_index))
    if parallelism == 1:
        return [work(s) for s in ordered]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(work, ordered))


def aggregate(results: list[RunResult], reporter: str) -> AggregateSeries:
    """Per-tick mean/std/min/max/count across completed iterations of one
    scenario for one reporter column."""
    completed = [r for r in results if r.status == "completed"]
    if not completed:
        raise BatchError("no completed runs to aggregate")
    scenario_ids = {r.spec.scenario_id for r in completed}
    if len(scenario_ids) != 1:
        raise BatchError(f"aggregate expects runs of one scenario, got {sorted(scenario_ids)}")
    ticks = [t for t, _ in completed[0].samples]
    for r in completed[1:]:
        if [t for t, _ in r.samples] != ticks:
            raise BatchError("runs have misaligned sample ticks")
    mean, std, mn, mx = [], [], [], []
    for i, _ in enumerate(ticks):
        values = [r.samples[i][1][reporter] for r in completed]
        m = sum(values) / len(values)
        mean.append(m)
        std.append(math.sqrt(sum((v - m) ** 2 for v in values) / len(values)))
        mn.append(min(values))
        mx.append(max(values))
    return AggregateSeries(
        scenario_id=completed[0].spec.scenario_id,
        reporter=reporter,
        ticks=ticks,
        mean=mean,
        std=std,
        min=mn,
        max=mx,
        count=len(completed),
    )


def samples_csv(result: RunResult) -> str:
    """Render the sample table as CSV: tick column, then reporter columns."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    columns = result.columns
    writer.writerow(["tick"] + columns)
    for tick, row in result.samples:
        writer.writerow([tick] + [repr(row[c]) for c in columns])
    return buf.getvalue()


def persist_result(result: RunResult, store_root: str | Path) -> Path:
    """Write runs/<run_id>/meta.json + samples.csv; directories are
    per-run so concurrent writers never share files."""
    run_dir = Path(store_root) / "runs" / result.run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "run_id": result.run_id,
        "spec": result.spec.to_json(),
        "status": result.status,
        "reason": result.reason,
        "wall_time": result.wall_time,
    }
    (run_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (run_dir / "samples.csv").write_text(samples_csv(result), encoding="utf-8")
    return run_dir


def load_result(run_id: str, store_root: str | Path) -> RunResult:
    run_dir = Path(store_root) / "runs" / run_id
    meta_path = run_dir / "meta.json"
    if not meta_path.exists():
        raise ResultNotFound(f"no persisted run {run_id!r} under {store_root}")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        rows = list(csv.reader(io.StringIO((run_dir / "samples.csv").read_text(encoding="utf-8"))))
    except (OSError, json.JSONDecodeError, csv.Error) as e:
        raise BatchError(f"corrupt persisted run {run_id!r}: {e}") from e
    if not rows or rows[0][:1] != ["tick"]:
        raise BatchError(f"corrupt samples.csv for run {run_id!r}")
    columns = rows[0][1:]
    samples = [
        (int(row[0]), {c: float(v) for c, v in zip(columns, row[1:])})
        for row in rows[1:]
    ]
    return RunResult(
        run_id=meta["run_id"],
        spec=RunSpec.from_json(meta["spec"]),
        samples=samples,
        status=meta["status"],
        reason=meta.get("reason", ""),
        wall_time=meta.get("wall_time", 0.0),
    )


def list_results(store_root: str | Path) -> list[str]:
    runs_dir = Path(store_root) / "runs"
    if not runs_dir.exists():
        return []
    return sorted(p.name for p in runs_dir.iterdir() if (p / "meta.json").exists())
