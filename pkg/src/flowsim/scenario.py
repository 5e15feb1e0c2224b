"""Scenario files, validation, flow fingerprints and the comparison table.

A scenario is the experimental unit: parameters, policies and one
behaviour flow per agent type, stored as a UTF-8 JSON document:

    {
      "name": "...",
      "description": "...",               # optional
      "parameters": {"num_agents": 500},
      "policies": [ ...policy objects... ],
      "flows": {
        "migrant": "flows/baseline.graphml",      # file reference, or
        "migrant": {"inline": "<graphml ...>"}    # inline XML
      }
    }
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from flowsim.diagnostics import Diagnostic
from flowsim.flows import BehaviourFlow, parse_graphml, serialize_graphml, validate_flow
from flowsim.kernel import AgentTypeDef, check_tag
from flowsim.policies import Policy, validate_policy


class ScenarioError(Exception):
    """Raised for malformed or unloadable scenario documents."""


@dataclass
class Scenario:
    name: str
    description: str = ""
    parameters: dict[str, Any] = field(default_factory=dict)
    policies: list[Policy] = field(default_factory=list)
    flows: dict[str, BehaviourFlow] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "parameters": self.parameters,
            "policies": [p.to_json() for p in self.policies],
            "flows": {t: {"inline": serialize_graphml(f)} for t, f in self.flows.items()},
        }


@dataclass(frozen=True)
class SimulationSettings:
    duration_steps: int
    iterations_per_scenario: int
    collection_interval: int

    def __post_init__(self):
        if self.duration_steps < 1:
            raise ValueError("duration_steps must be positive")
        if self.iterations_per_scenario < 1:
            raise ValueError("iterations_per_scenario must be positive")
        if not 1 <= self.collection_interval <= self.duration_steps:
            raise ValueError("collection_interval must be in [1, duration_steps]")

    def to_json(self) -> dict:
        return {
            "duration_steps": self.duration_steps,
            "iterations_per_scenario": self.iterations_per_scenario,
            "collection_interval": self.collection_interval,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SimulationSettings":
        try:
            return cls(
                duration_steps=int(doc["duration_steps"]),
                iterations_per_scenario=int(doc["iterations_per_scenario"]),
                collection_interval=int(doc["collection_interval"]),
            )
        except KeyError as e:
            raise ScenarioError(f"settings missing required field {e.args[0]!r}") from e


def load_scenario(json_text: str, base_dir: str | Path | None = None) -> Scenario:
    """Load a scenario document; flow file references resolve against
    `base_dir` (default: current directory)."""
    try:
        doc = json.loads(json_text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"malformed JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    if "name" not in doc or not isinstance(doc["name"], str) or not doc["name"]:
        raise ScenarioError("scenario missing required field 'name'")

    policies = [Policy.from_json(p) for p in doc.get("policies", [])]
    names = [p.name for p in policies]
    if len(names) != len(set(names)):
        raise ScenarioError("policy names must be unique within a scenario")

    base = Path(base_dir) if base_dir is not None else Path(".")
    flows: dict[str, BehaviourFlow] = {}
    for agent_type, ref in doc.get("flows", {}).items():
        if isinstance(ref, str):
            path = base / ref
            try:
                xml_text = path.read_text(encoding="utf-8")
            except OSError as e:
                raise ScenarioError(f"flow file {ref!r} for type {agent_type!r}: {e}") from e
        elif isinstance(ref, dict) and "inline" in ref:
            xml_text = ref["inline"]
        else:
            raise ScenarioError(f"flow for type {agent_type!r} must be a path or {{'inline': xml}}")
        try:
            flows[agent_type] = parse_graphml(xml_text, agent_type=agent_type)
        except Exception as e:
            raise ScenarioError(f"flow for type {agent_type!r}: {e}") from e

    return Scenario(
        name=doc["name"],
        description=doc.get("description", ""),
        parameters=dict(doc.get("parameters", {})),
        policies=policies,
        flows=flows,
    )


def save_scenario(scenario: Scenario) -> str:
    """Serialize to the scenario JSON format with flows inlined."""
    return json.dumps(scenario.to_json(), indent=2, sort_keys=True) + "\n"


def validate_scenario(
    scenario: Scenario,
    type_defs: list[AgentTypeDef],
    parameter_schema: dict[str, str],
    populated_types: list[str] | None = None,
) -> list[Diagnostic]:
    """Union of policy, flow, parameter-tag and missing-flow diagnostics.

    `populated_types` lists agent types that will have live agents and
    therefore need a flow; defaults to every declared type.
    """
    out: list[Diagnostic] = []
    defs = {td.name: td for td in type_defs}
    for name, value in scenario.parameters.items():
        tag = parameter_schema.get(name)
        if tag is None:
            out.append(Diagnostic("unknown-parameter", f"parameter {name!r} is not in the model's parameter schema"))
        elif not check_tag(value, tag):
            out.append(Diagnostic("tag-mismatch", f"parameter {name!r} value {value!r} does not match tag {tag!r}"))
    for policy in scenario.policies:
        td = defs.get(policy.agent_type)
        if td is None:
            out.append(Diagnostic("unknown-agent-type", f"policy {policy.name!r} targets unknown type {policy.agent_type!r}", policy.name))
        else:
            out.extend(validate_policy(policy, td))
    for agent_type, flow in scenario.flows.items():
        td = defs.get(agent_type)
        if td is None:
            out.append(Diagnostic("unknown-agent-type", f"flow bound to unknown type {agent_type!r}"))
        else:
            out.extend(validate_flow(flow, td))
    for agent_type in populated_types if populated_types is not None else defs:
        if agent_type not in scenario.flows:
            out.append(Diagnostic("missing-flow", f"no behaviour flow for agent type {agent_type!r}"))
    return out


def flow_fingerprint(flow: BehaviourFlow) -> str:
    """Layout-insensitive digest of the flow's canonical structure."""
    doc = {
        "nodes": sorted(
            (n.node_id, n.kind, n.behavior_name or "", n.exec_probability)
            for n in flow.nodes
        ),
        "edges": sorted((e.source, e.target, e.weight) for e in flow.edges),
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _policy_cell(policy: Policy) -> str:
    digest = hashlib.sha256(
        json.dumps(policy.to_json(), sort_keys=True).encode("utf-8")
    ).hexdigest()[:8]
    return f"{len(policy.conditions)}c/{len(policy.actions)}a#{digest}"


ABSENT = "—"


@dataclass(frozen=True)
class ComparisonRow:
    facet: str  # "parameter" | "policy" | "flow"
    name: str
    cells: tuple[str, ...]
    differs: bool


@dataclass
class ComparisonTable:
    columns: list[str]  # scenario names, in selection order
    rows: list[ComparisonRow]

    def to_json(self) -> dict:
        return {
            "columns": self.columns,
            "rows": [
                {"facet": r.facet, "name": r.name, "cells": list(r.cells), "differs": r.differs}
                for r in self.rows
            ],
        }


def compare(scenarios: list[Scenario]) -> ComparisonTable:
    """Facet-by-scenario matrix over the union of parameter names, policy
    names and per-type flow fingerprints; a row differs iff its cells are
    not all equal."""
    if not scenarios:
        raise ValueError("compare requires at least one scenario")

    def union_ordered(lists):
        seen: dict[str, None] = {}
        for names in lists:
            for n in names:
                seen.setdefault(n)
        return list(seen)

    param_names = union_ordered([sorted(s.parameters) for s in scenarios])
    policy_names = union_ordered([[p.name for p in s.policies] for s in scenarios])
    flow_types = union_ordered([sorted(s.flows) for s in scenarios])

    rows: list[ComparisonRow] = []
    for name in param_names:
        cells = tuple(
            json.dumps(s.parameters[name]) if name in s.parameters else ABSENT
            for s in scenarios
        )
        rows.append(ComparisonRow("parameter", name, cells, len(set(cells)) > 1))
    for name in policy_names:
        cells = []
        for s in scenarios:
            match = next((p for p in s.policies if p.name == name), None)
            cells.append(_policy_cell(match) if match else ABSENT)
        cells = tuple(cells)
        rows.append(ComparisonRow("policy", name, cells, len(set(cells)) > 1))
    for agent_type in flow_types:
        cells = tuple(
            flow_fingerprint(s.flows[agent_type])[:12] if agent_type in s.flows else ABSENT
            for s in scenarios
        )
        rows.append(ComparisonRow("flow", agent_type, cells, len(set(cells)) > 1))

    return ComparisonTable(columns=[s.name for s in scenarios], rows=rows)
