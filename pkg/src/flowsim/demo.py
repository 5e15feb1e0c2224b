"""Desk-scale demo model: economic migrants choosing among regions.

Eight synthetic square regions differ in per-tick job availability, wage
and living cost. Migrant agents look for work, earn and spend, and
relocate after a spell of unemployment. All numbers are synthetic and
chosen so every behavior is exercised within a 100-tick run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

from flowsim.batch import ModelBundle, Reporter
from flowsim.flows import generate_raw_flow, sequential_flow
from flowsim.kernel import AgentState, AgentTypeDef, AttributeSpec, ModelState
from flowsim.policies import Condition, Policy, PolicyAction
from flowsim.scenario import Scenario

AGENT_TYPE = "migrant"

DEFAULT_PARAMETERS: dict[str, Any] = {
    "num_agents": 500,
    "benefit": 6.0,
}

PARAMETER_SCHEMA: dict[str, str] = {
    "num_agents": "int",
    "benefit": "real",
}

RELOCATION_THRESHOLD = 3  # months unemployed before moving


@dataclass(frozen=True)
class RegionDef:
    region_id: str
    job_availability: float  # per-tick employment probability in [0,1]
    wage: float
    living_cost: float
    # synthetic unit-square polygon, GeoJSON ring (lon, lat)
    ring: tuple[tuple[float, float], ...]

    def attributes(self) -> dict[str, Any]:
        return {
            "job_availability": self.job_availability,
            "wage": self.wage,
            "living_cost": self.living_cost,
        }


def _square(col: int, row: int) -> tuple[tuple[float, float], ...]:
    x, y = float(col), float(row)
    return ((x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1), (x, y))


# availabilities spread over [0.1, 0.8]; wage 10, living cost 4 everywhere
REGIONS: list[RegionDef] = [
    RegionDef("R1", 0.10, 10.0, 4.0, _square(0, 0)),
    RegionDef("R2", 0.20, 10.0, 4.0, _square(1, 0)),
    RegionDef("R3", 0.30, 10.0, 4.0, _square(2, 0)),
    RegionDef("R4", 0.40, 10.0, 4.0, _square(3, 0)),
    RegionDef("R5", 0.50, 10.0, 4.0, _square(0, 1)),
    RegionDef("R6", 0.60, 10.0, 4.0, _square(1, 1)),
    RegionDef("R7", 0.70, 10.0, 4.0, _square(2, 1)),
    RegionDef("R8", 0.80, 10.0, 4.0, _square(3, 1)),
]


def seek_job(agent: AgentState, model: ModelState, rng: random.Random) -> None:
    """Unemployed agents find work with their region's job availability."""
    if agent.attributes["employed"]:
        return
    availability = model.regions[agent.attributes["region"]]["job_availability"]
    hired = availability >= 1.0 or (availability > 0.0 and rng.random() < availability)
    if hired:
        agent.attributes["employed"] = True
        agent.attributes["months_unemployed"] = 0
    else:
        agent.attributes["months_unemployed"] += 1


def earn_and_spend(agent: AgentState, model: ModelState, rng: random.Random) -> None:
    region = model.regions[agent.attributes["region"]]
    if agent.attributes["employed"]:
        agent.attributes["savings"] += region["wage"]
    agent.attributes["savings"] -= region["living_cost"]


def consider_relocation(agent: AgentState, model: ModelState, rng: random.Random) -> None:
    """After a long unemployment spell, move to the best job market.

    Ties on availability break toward the lexicographically smaller
    region id; employed agents never move.
    """
    if agent.attributes["employed"]:
        return
    if agent.attributes["months_unemployed"] < RELOCATION_THRESHOLD:
        return
    best = min(model.regions, key=lambda rid: (-model.regions[rid]["job_availability"], rid))
    agent.attributes["region"] = best


def _init_migrant(agent: AgentState, model: ModelState, rng: random.Random) -> None:
    region_ids = sorted(model.regions)
    if region_ids:
        agent.attributes["region"] = region_ids[rng.randrange(len(region_ids))]


def migrant_type_def() -> AgentTypeDef:
    return AgentTypeDef(
        name=AGENT_TYPE,
        attribute_schema=[
            AttributeSpec("region", "region", "R1"),
            AttributeSpec("employed", "bool", False),
            AttributeSpec("savings", "real", 0.0),
            AttributeSpec("months_unemployed", "int", 0),
        ],
        behaviors={
            "seek_job": seek_job,
            "earn_and_spend": earn_and_spend,
            "consider_relocation": consider_relocation,
        },
        initializer=_init_migrant,
    )


def _employment_rate(model: ModelState) -> float:
    if not model.agents:
        return 0.0
    employed = sum(1 for a in model.agents if a.attributes["employed"])
    return employed / len(model.agents)


def _mean_savings(model: ModelState) -> float:
    if not model.agents:
        return 0.0
    return sum(a.attributes["savings"] for a in model.agents) / len(model.agents)


def _population_by_region(model: ModelState) -> dict[str, float]:
    counts = {rid: 0.0 for rid in model.regions}
    for a in model.agents:
        counts[a.attributes["region"]] += 1.0
    return counts


def _unemployment_by_region(model: ModelState) -> dict[str, float]:
    counts = {rid: 0.0 for rid in model.regions}
    for a in model.agents:
        if not a.attributes["employed"]:
            counts[a.attributes["region"]] += 1.0
    return counts


def demo_reporters() -> list[Reporter]:
    return [
        Reporter("employment_rate", "scalar", _employment_rate),
        Reporter("mean_savings", "scalar", _mean_savings),
        Reporter("population_by_region", "per_region", _population_by_region),
        Reporter("unemployment_by_region", "per_region", _unemployment_by_region),
    ]


def regions_geojson() -> dict:
    return {
        "type": "FeatureCollection",
        "features": [
            {
                "type": "Feature",
                "properties": {
                    "region_id": r.region_id,
                    "job_availability": r.job_availability,
                    "wage": r.wage,
                    "living_cost": r.living_cost,
                },
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[list(pt) for pt in r.ring]],
                },
            }
            for r in REGIONS
        ],
    }


def build_demo_bundle() -> ModelBundle:
    return ModelBundle(
        type_defs=[migrant_type_def()],
        parameter_schema=PARAMETER_SCHEMA,
        default_parameters=dict(DEFAULT_PARAMETERS),
        regions={r.region_id: r.attributes() for r in REGIONS},
        reporters=demo_reporters(),
        population=lambda params: {AGENT_TYPE: int(params["num_agents"])},
        geojson=regions_geojson(),
    )


def jobseeker_policy(benefit: float = DEFAULT_PARAMETERS["benefit"]) -> Policy:
    """Unconditional transfer to every unemployed migrant each tick."""
    return Policy(
        name="Jobseeker Policy",
        agent_type=AGENT_TYPE,
        conditions=[Condition("employed", "eq", False)],
        actions=[PolicyAction("savings", "add", benefit)],
    )


def baseline_scenario() -> Scenario:
    td = migrant_type_def()
    return Scenario(
        name="baseline",
        description="No interventions; default raw behaviour flow.",
        parameters=dict(DEFAULT_PARAMETERS),
        policies=[],
        flows={AGENT_TYPE: generate_raw_flow(td)},
    )


def jobseeker_scenario() -> Scenario:
    td = migrant_type_def()
    benefit = DEFAULT_PARAMETERS["benefit"]
    return Scenario(
        name="jobseeker",
        description="Baseline plus a per-tick benefit for unemployed migrants.",
        parameters=dict(DEFAULT_PARAMETERS),
        policies=[jobseeker_policy(benefit)],
        flows={AGENT_TYPE: generate_raw_flow(td)},
    )


def sequential_scenario(name: str, behavior_order: list[str]) -> Scenario:
    """Scenario whose flow is a fixed linear chain over the given behaviors."""
    td = migrant_type_def()
    return Scenario(
        name=name,
        description=f"Sequential flow: {' -> '.join(behavior_order)}",
        parameters=dict(DEFAULT_PARAMETERS),
        policies=[],
        flows={AGENT_TYPE: sequential_flow(td, behavior_order)},
    )
