"""Render batch results as figures: mean +/- std charts and choropleths."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Polygon as MplPolygon

from flowsim.batch import AggregateSeries


def plot_aggregate(
    series_list: list[AggregateSeries],
    out_path: str | Path,
    title: str = "",
) -> Path:
    """Line chart of per-tick mean with a +/- 1 std band, one line per series."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for s in series_list:
        label = f"{s.scenario_id}: {s.reporter}"
        ax.plot(s.ticks, s.mean, label=label)
        lo = [m - d for m, d in zip(s.mean, s.std)]
        hi = [m + d for m, d in zip(s.mean, s.std)]
        ax.fill_between(s.ticks, lo, hi, alpha=0.2)
    ax.set_xlabel("tick")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return out


def plot_choropleth(
    geojson: dict,
    values: dict[str, float],
    out_path: str | Path,
    title: str = "",
) -> Path:
    """Color region polygons by value; legend range is [min, max] of the frame."""
    fig, ax = plt.subplots(figsize=(7, 5))
    vals = [values[k] for k in values] or [0.0]
    vmin, vmax = min(vals), max(vals)
    span = (vmax - vmin) or 1.0
    cmap = plt.get_cmap("viridis")
    for feature in geojson.get("features", []):
        rid = feature["properties"]["region_id"]
        if feature["geometry"]["type"] != "Polygon":
            continue
        ring = feature["geometry"]["coordinates"][0]
        v = values.get(rid, vmin)
        patch = MplPolygon(ring, closed=True, facecolor=cmap((v - vmin) / span), edgecolor="black")
        ax.add_patch(patch)
        cx = sum(p[0] for p in ring[:-1]) / (len(ring) - 1)
        cy = sum(p[1] for p in ring[:-1]) / (len(ring) - 1)
        ax.annotate(f"{rid}\n{v:g}", (cx, cy), ha="center", va="center", fontsize=8)
    ax.autoscale_view()
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.set_title(title)
    sm = plt.cm.ScalarMappable(cmap=cmap, norm=plt.Normalize(vmin=vmin, vmax=vmax))
    fig.colorbar(sm, ax=ax, shrink=0.8)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return out
