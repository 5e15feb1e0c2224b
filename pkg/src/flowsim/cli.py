"""Command-line interface: batch runs, aggregation, comparison, raw flow
generation, report figures and the HTTP server."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from flowsim.batch import (
    aggregate as aggregate_results,
    execute_batch,
    list_results,
    load_result,
    plan_batch,
)
from flowsim.demo import (
    baseline_scenario,
    build_demo_bundle,
    jobseeker_scenario,
    regions_geojson,
)
from flowsim.flows import generate_raw_flow, serialize_graphml
from flowsim.scenario import (
    SimulationSettings,
    compare as compare_scenarios,
    load_scenario,
    save_scenario,
)


def _load_scenario_file(path: str):
    p = Path(path)
    return load_scenario(p.read_text(encoding="utf-8"), base_dir=p.parent)


@click.group()
def main():
    """Scenario-driven agent-based simulation engine."""


@main.command()
@click.option("--scenarios", "scenario_files", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--duration", type=int, required=True, help="Simulation length in ticks.")
@click.option("--iterations", type=int, required=True, help="Seeded replicates per scenario.")
@click.option("--interval", type=int, required=True, help="Ticks between reporter samples.")
@click.option("--seed", type=int, default=0, show_default=True, help="Base seed for derived run seeds.")
@click.option("--out", "store_root", type=click.Path(), required=True, help="Results store directory.")
@click.option("--parallelism", type=int, default=1, show_default=True)
def run(scenario_files, duration, iterations, interval, seed, store_root, parallelism):
    """Execute scenarios x iterations and persist results."""
    bundle = build_demo_bundle()
    scenarios = [_load_scenario_file(f) for f in scenario_files]
    settings = SimulationSettings(duration, iterations, interval)
    specs = plan_batch(scenarios, settings, seed)

    def progress(done, total):
        click.echo(f"\r{done}/{total} runs", nl=False, err=True)

    results = execute_batch(specs, scenarios, bundle, parallelism=parallelism,
                            store_root=store_root, progress=progress)
    click.echo("", err=True)
    failed = [r for r in results if r.status != "completed"]
    for r in failed:
        click.echo(f"FAILED {r.run_id}: {r.reason}", err=True)
    click.echo(f"{len(results) - len(failed)}/{len(results)} runs completed -> {store_root}")
    sys.exit(1 if failed else 0)


@main.command()
@click.option("--store", "store_root", type=click.Path(exists=True), required=True)
@click.option("--scenario", "scenario_id", required=True)
@click.option("--reporter", required=True)
@click.option("--out", "out_path", default="-", show_default=True, help="Output CSV path ('-' for stdout).")
def aggregate(store_root, scenario_id, reporter, out_path):
    """Aggregate persisted runs of one scenario into per-tick statistics."""
    results = [load_result(rid, store_root) for rid in list_results(store_root)]
    results = [r for r in results if r.spec.scenario_id == scenario_id]
    if not results:
        raise click.ClickException(f"no persisted runs for scenario {scenario_id!r} in {store_root}")
    series = aggregate_results(results, reporter)
    out = sys.stdout if out_path == "-" else open(out_path, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["tick", "mean", "std", "min", "max", "count"])
        for i, t in enumerate(series.ticks):
            writer.writerow([t, series.mean[i], series.std[i], series.min[i], series.max[i], series.count])
    finally:
        if out is not sys.stdout:
            out.close()


@main.command()
@click.option("--scenarios", "scenario_files", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", default="-", show_default=True, help="Output JSON path ('-' for stdout).")
def compare(scenario_files, out_path):
    """Comparison table over scenario files (parameters, policies, flows)."""
    table = compare_scenarios([_load_scenario_file(f) for f in scenario_files]).to_json()
    text = json.dumps(table, ensure_ascii=False, indent=2) + "\n"
    if out_path == "-":
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


@main.command()
@click.option("--agent-type", "agent_type", required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def rawflow(agent_type, out_path):
    """Write the default raw behaviour flow for an agent type as GraphML."""
    bundle = build_demo_bundle()
    td = next((t for t in bundle.type_defs if t.name == agent_type), None)
    if td is None:
        raise click.ClickException(f"unknown agent type {agent_type!r}")
    Path(out_path).write_text(serialize_graphml(generate_raw_flow(td)), encoding="utf-8")
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--store", "store_root", type=click.Path(exists=True), required=True)
@click.option("--scenario", "scenario_ids", multiple=True, required=True)
@click.option("--reporter", required=True)
@click.option("--tick", type=int, default=None, help="Tick for the choropleth frame (per-region reporters).")
@click.option("--out-dir", type=click.Path(), required=True)
def report(store_root, scenario_ids, reporter, tick, out_dir):
    """Render figures (and CSV) for persisted results.

    Scalar reporters get a mean +/- std chart; per-region reporters get a
    choropleth at the chosen tick (default: final sampled tick).
    """
    from flowsim.report import plot_aggregate, plot_choropleth

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    all_results = [load_result(rid, store_root) for rid in list_results(store_root)]
    bundle = build_demo_bundle()
    rep = next((r for r in bundle.reporters if r.name == reporter), None)

    if rep is not None and rep.kind == "per_region":
        sid = scenario_ids[0]
        results = [r for r in all_results if r.spec.scenario_id == sid and r.status == "completed"]
        if not results:
            raise click.ClickException(f"no completed runs for scenario {sid!r}")
        ticks = [t for t, _ in results[0].samples]
        frame_tick = tick if tick is not None else ticks[-1]
        if frame_tick not in ticks:
            raise click.ClickException(f"tick {frame_tick} not sampled; valid: {ticks}")
        prefix = f"{reporter}/"
        regions = sorted(c[len(prefix):] for c in results[0].columns if c.startswith(prefix))
        values = {
            region: sum(dict(r.samples)[frame_tick][prefix + region] for r in results) / len(results)
            for region in regions
        }
        csv_path = out / f"{reporter}_t{frame_tick}_{sid}.csv"
        with open(csv_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["region_id", "mean"])
            for region in regions:
                writer.writerow([region, values[region]])
        png = plot_choropleth(regions_geojson(), values, out / f"{reporter}_t{frame_tick}_{sid}.png",
                              title=f"{reporter} @ tick {frame_tick} ({sid})")
        click.echo(f"wrote {csv_path} and {png}")
        return

    series_list = []
    for sid in scenario_ids:
        results = [r for r in all_results if r.spec.scenario_id == sid]
        if not results:
            raise click.ClickException(f"no persisted runs for scenario {sid!r}")
        series_list.append(aggregate_results(results, reporter))
    csv_path = out / f"{reporter}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["scenario", "tick", "mean", "std", "min", "max", "count"])
        for s in series_list:
            for i, t in enumerate(s.ticks):
                writer.writerow([s.scenario_id, t, s.mean[i], s.std[i], s.min[i], s.max[i], s.count])
    png = plot_aggregate(series_list, out / f"{reporter}.png", title=reporter)
    click.echo(f"wrote {csv_path} and {png}")


@main.command()
@click.option("--out", "out_dir", type=click.Path(), required=True)
def demo(out_dir):
    """Write the bundled demo fixtures: scenarios, flows and region geometry."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for scenario in (baseline_scenario(), jobseeker_scenario()):
        (out / f"{scenario.name}.json").write_text(save_scenario(scenario), encoding="utf-8")
    (out / "regions.geojson").write_text(
        json.dumps(regions_geojson(), indent=2) + "\n", encoding="utf-8"
    )
    click.echo(f"wrote demo fixtures to {out}")


@main.command()
@click.option("--store", "store_root", type=click.Path(), default="flowsim-store", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(store_root, host, port):
    """Start the HTTP API server."""
    import uvicorn

    from flowsim.server import create_app

    uvicorn.run(create_app(store_root=store_root), host=host, port=port)


if __name__ == "__main__":
    main()
