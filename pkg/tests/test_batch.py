import csv
import io
import random

import pytest

from flowsim.batch import (
    BatchError,
    ResultNotFound,
    aggregate,
    derive_seed,
    execute_batch,
    execute_run,
    list_results,
    load_result,
    persist_result,
    plan_batch,
    sample_ticks,
    samples_csv,
)
from flowsim.demo import baseline_scenario, jobseeker_scenario
from flowsim.policies import Condition, Policy, PolicyAction
from flowsim.scenario import SimulationSettings


SMALL = SimulationSettings(duration_steps=30, iterations_per_scenario=2, collection_interval=10)


def small_scenarios():
    a, b = baseline_scenario(), jobseeker_scenario()
    for s in (a, b):
        s.parameters["num_agents"] = 40
    return [a, b]


def test_derive_seed_stable():
    assert derive_seed(42, 0, 0) == derive_seed(42, 0, 0)
    assert derive_seed(42, 0, 0) != derive_seed(42, 0, 1)
    assert derive_seed(42, 0, 0) != derive_seed(43, 0, 0)


def test_derive_seed_collision_free_at_scale():
    seeds = {derive_seed(7, s, i) for s in range(100) for i in range(100)}
    assert len(seeds) == 10000


@pytest.mark.parametrize(
    "duration,interval,expected",
    [
        (30, 10, [0, 10, 20, 30]),
        (7, 3, [0, 3, 6, 7]),
        (5, 1, [0, 1, 2, 3, 4, 5]),
        (10, 10, [0, 10]),
    ],
)
def test_sample_ticks_examples(duration, interval, expected):
    assert sample_ticks(duration, interval) == expected


def test_sample_ticks_law_random_pairs():
    rng = random.Random(3)
    for _ in range(50):
        duration = rng.randrange(1, 500)
        interval = rng.randrange(1, duration + 1)
        expected = sorted({t for t in range(duration + 1) if t % interval == 0} | {duration})
        assert sample_ticks(duration, interval) == expected


def test_plan_batch_product_and_determinism():
    scenarios = small_scenarios()
    settings = SimulationSettings(30, 3, 10)
    plan1 = plan_batch(scenarios, settings, base_seed=5)
    plan2 = plan_batch(scenarios, settings, base_seed=5)
    assert len(plan1) == 6
    assert plan1 == plan2
    assert len({(s.scenario_index, s.iteration_index) for s in plan1}) == 6
    assert len({s.seed for s in plan1}) == 6


def test_plan_batch_empty():
    with pytest.raises(BatchError):
        plan_batch([], SMALL, 0)


def test_execute_run_sample_grid(bundle):
    scenario = small_scenarios()[0]
    spec = plan_batch([scenario], SMALL, 1)[0]
    result = execute_run(spec, scenario, bundle)
    assert result.status == "completed"
    assert [t for t, _ in result.samples] == [0, 10, 20, 30]


def test_execute_run_deterministic(bundle):
    scenario = small_scenarios()[0]
    spec = plan_batch([scenario], SMALL, 9)[0]
    r1 = execute_run(spec, scenario, bundle)
    r2 = execute_run(spec, scenario, bundle)
    assert samples_csv(r1) == samples_csv(r2)


def test_execute_run_failure_keeps_partial_samples(bundle):
    scenario = small_scenarios()[0]
    # validation is deliberately skipped: this policy blows up at runtime
    scenario.policies = [
        Policy(name="boom", agent_type="migrant",
               conditions=[Condition("region", "lt", "R9")],
               actions=[PolicyAction("savings", "add", 1.0)])
    ]
    spec = plan_batch([scenario], SMALL, 1)[0]
    result = execute_run(spec, scenario, bundle)
    assert result.status == "failed"
    assert "PolicyError" in result.reason
    assert [t for t, _ in result.samples] == [0]  # tick-0 sample retained


def test_execute_batch_parallel_equivalence(bundle):
    scenarios = small_scenarios()
    specs = plan_batch(scenarios, SMALL, 11)
    serial = execute_batch(specs, scenarios, bundle, parallelism=1)
    parallel = execute_batch(specs, scenarios, bundle, parallelism=8)
    assert [r.run_id for r in serial] == [r.run_id for r in parallel]
    assert [samples_csv(r) for r in serial] == [samples_csv(r) for r in parallel]


def test_execute_batch_failure_isolation(bundle):
    scenarios = small_scenarios()
    scenarios[1].policies = [
        Policy(name="boom", agent_type="migrant",
               conditions=[Condition("region", "lt", "R9")],
               actions=[PolicyAction("savings", "add", 1.0)])
    ]
    specs = plan_batch(scenarios, SMALL, 2)
    results = execute_batch(specs, scenarios, bundle, parallelism=2)
    by_index = {}
    for r in results:
        by_index.setdefault(r.spec.scenario_index, set()).add(r.status)
    assert by_index[0] == {"completed"}
    assert by_index[1] == {"failed"}


def test_execute_batch_empty(bundle):
    assert execute_batch([], [], bundle, parallelism=2) == []


def test_execute_batch_progress(bundle):
    scenarios = small_scenarios()
    specs = plan_batch(scenarios, SMALL, 3)
    seen = []
    execute_batch(specs, scenarios, bundle, parallelism=2,
                  progress=lambda done, total: seen.append((done, total)))
    assert sorted(seen) == [(i, len(specs)) for i in range(1, len(specs) + 1)]


def test_aggregate_identical_runs(bundle):
    scenario = small_scenarios()[0]
    spec = plan_batch([scenario], SMALL, 4)[0]
    result = execute_run(spec, scenario, bundle)
    series = aggregate([result, result, result], "mean_savings")
    assert series.count == 3
    assert all(s == 0.0 for s in series.std)
    assert series.mean == [row["mean_savings"] for _, row in result.samples]


def test_aggregate_hand_arithmetic(bundle):
    scenario = small_scenarios()[0]
    specs = plan_batch([scenario], SimulationSettings(30, 2, 10), 4)
    r1, r2 = (execute_run(s, scenario, bundle) for s in specs)
    # overwrite one column with known values at every tick
    for i in range(len(r1.samples)):
        r1.samples[i][1]["mean_savings"] = 1.0
        r2.samples[i][1]["mean_savings"] = 3.0
    series = aggregate([r1, r2], "mean_savings")
    assert all(m == 2.0 for m in series.mean)
    assert all(s == 1.0 for s in series.std)
    assert all(v == 1.0 for v in series.min)
    assert all(v == 3.0 for v in series.max)


def test_aggregate_matches_csv_bruteforce(bundle, tmp_path):
    """Oracle: recompute statistics straight from the persisted CSV files."""
    scenarios = small_scenarios()
    specs = plan_batch(scenarios, SMALL, 13)
    results = execute_batch(specs, scenarios, bundle, parallelism=1, store_root=tmp_path)
    baseline_runs = [r for r in results if r.spec.scenario_id == "baseline"]
    series = aggregate(baseline_runs, "employment_rate")

    tables = []
    for rid in list_results(tmp_path):
        run_dir = tmp_path / "runs" / rid
        if "baseline" not in rid:
            continue
        rows = list(csv.DictReader(io.StringIO((run_dir / "samples.csv").read_text())))
        tables.append({int(r["tick"]): float(r["employment_rate"]) for r in rows})
    for i, tick in enumerate(series.ticks):
        values = [t[tick] for t in tables]
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        assert series.mean[i] == pytest.approx(mean)
        assert series.std[i] == pytest.approx(var ** 0.5)
        assert series.min[i] == min(values)
        assert series.max[i] == max(values)
    assert series.count == len(tables)


def test_aggregate_requires_completed():
    with pytest.raises(BatchError):
        aggregate([], "x")


def test_persist_load_roundtrip(bundle, tmp_path):
    scenario = small_scenarios()[0]
    spec = plan_batch([scenario], SMALL, 21)[0]
    result = execute_run(spec, scenario, bundle)
    persist_result(result, tmp_path)
    loaded = load_result(result.run_id, tmp_path)
    assert loaded.run_id == result.run_id
    assert loaded.spec == result.spec
    assert loaded.status == result.status
    assert loaded.samples == result.samples


def test_load_unknown_run(tmp_path):
    with pytest.raises(ResultNotFound):
        load_result("nope", tmp_path)


def test_load_corrupt_samples(bundle, tmp_path):
    scenario = small_scenarios()[0]
    spec = plan_batch([scenario], SMALL, 22)[0]
    result = execute_run(spec, scenario, bundle)
    run_dir = persist_result(result, tmp_path)
    (run_dir / "samples.csv").write_text("what even is this\n", encoding="utf-8")
    with pytest.raises(BatchError):
        load_result(result.run_id, tmp_path)
