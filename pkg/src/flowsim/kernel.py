"""Deterministic seeded simulation state and the per-tick step loop.

Attribute values are plain Python scalars; their type discipline is carried
by a tag declared in the agent type schema:

    real         -> float (int accepted, bools rejected)
    int          -> int
    bool         -> bool
    categorical  -> str
    region       -> str (a region identifier)

One `random.Random` stream per model, consumed in a fixed global order
(policy sweep in declaration x id order, then flow traversal in ascending
agent id order) so that identical seeds give identical runs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any, Callable

TAGS = ("real", "int", "bool", "categorical", "region")

NUMERIC_TAGS = ("real", "int")


class ModelError(Exception):
    """Raised for structural problems when building or stepping a model."""


def check_tag(value: Any, tag: str) -> bool:
    """True iff `value` is acceptable for attribute tag `tag`."""
    if tag == "real":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if tag == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if tag == "bool":
        return isinstance(value, bool)
    if tag in ("categorical", "region"):
        return isinstance(value, str)
    raise ValueError(f"unknown attribute tag: {tag!r}")


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    tag: str
    default: Any

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown attribute tag: {self.tag!r}")
        if not check_tag(self.default, self.tag):
            raise ValueError(
                f"default {self.default!r} does not match tag {self.tag!r} "
                f"for attribute {self.name!r}"
            )


# A behavior mutates the given agent (and, through the environment, the
# model) drawing randomness only from the provided stream.
BehaviorFn = Callable[["AgentState", "ModelState", random.Random], None]


@dataclass
class AgentTypeDef:
    """Agent type: attribute schema plus an ordered registry of behaviors."""

    name: str
    attribute_schema: list[AttributeSpec]
    behaviors: dict[str, BehaviorFn]
    # optional stochastic initializer, called once per agent in id order
    initializer: Callable[["AgentState", "ModelState", random.Random], None] | None = None

    def __post_init__(self):
        names = [s.name for s in self.attribute_schema]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate attribute names in schema of {self.name!r}")

    @property
    def schema_map(self) -> dict[str, AttributeSpec]:
        return {s.name: s for s in self.attribute_schema}


@dataclass
class AgentState:
    id: int
    agent_type: str
    attributes: dict[str, Any]


@dataclass
class ModelState:
    tick: int
    agents: list[AgentState]
    environment: dict[str, Any]
    regions: dict[str, dict[str, Any]]
    parameters: dict[str, Any]
    rng: random.Random
    type_defs: dict[str, AgentTypeDef]
    metrics: dict[str, int] = field(default_factory=dict)
    # called once per tick after flow traversal, before the tick increment
    env_update: Callable[["ModelState"], None] | None = None


def create_model(
    type_defs: list[AgentTypeDef],
    parameters: dict[str, Any],
    population_spec: dict[str, int],
    seed: int,
    regions: dict[str, dict[str, Any]] | None = None,
    environment: dict[str, Any] | None = None,
    env_update: Callable[[ModelState], None] | None = None,
) -> ModelState:
    """Build a fresh model at tick 0 with a seeded random stream.

    Agents are created per `population_spec` in declaration order of
    `type_defs`, ids ascending from 0, attributes set to schema defaults,
    then the type's initializer (if any) runs per agent in id order.
    """
    defs: dict[str, AgentTypeDef] = {}
    for td in type_defs:
        if td.name in defs:
            raise ModelError(f"duplicate agent type name: {td.name!r}")
        defs[td.name] = td
    for name, count in population_spec.items():
        if name not in defs:
            raise ModelError(f"unknown agent type in population spec: {name!r}")
        if count < 0:
            raise ModelError(f"negative population for {name!r}")

    model = ModelState(
        tick=0,
        agents=[],
        environment=dict(environment or {}),
        regions={rid: dict(attrs) for rid, attrs in (regions or {}).items()},
        parameters=dict(parameters),
        rng=random.Random(seed),
        type_defs=defs,
        env_update=env_update,
    )

    next_id = 0
    for td in type_defs:
        count = population_spec.get(td.name, 0)
        for _ in range(count):
            attrs = {s.name: s.default for s in td.attribute_schema}
            agent = AgentState(id=next_id, agent_type=td.name, attributes=attrs)
            model.agents.append(agent)
            next_id += 1
    for agent in model.agents:
        init = defs[agent.agent_type].initializer
        if init is not None:
            init(agent, model, model.rng)
    return model


def step(model: ModelState, flows: dict, policies: list) -> ModelState:
    """Advance the model one tick, in place.

    Phase order: (1) policy sweep over all agents, (2) flow traversal per
    agent in ascending id order, (3) environment update hook, (4) tick + 1.
    `flows` maps agent type name to a BehaviourFlow or pre-bound flow.
    """
    # local imports: flows/policies modules import kernel types
    from flowsim.flows import BoundFlow, bind
    from flowsim.policies import sweep

    live_types = {a.agent_type for a in model.agents}
    bound: dict[str, BoundFlow] = {}
    for t in sorted(live_types):
        flow = flows.get(t)
        if flow is None:
            raise ModelError(f"no behaviour flow bound for agent type {t!r}")
        bound[t] = flow if isinstance(flow, BoundFlow) else bind(flow, model.type_defs[t])

    sweep(policies, model)
    for agent in model.agents:
        bound[agent.agent_type].traverse(agent, model, model.rng)
    if model.env_update is not None:
        model.env_update(model)
    model.tick += 1
    return model


def canonical_state(model: ModelState) -> str:
    """Sorted-key JSON of tick, parameters, environment and agents in id order.

    The canonical form backs all determinism tests: two runs are considered
    identical iff their canonical serializations are byte-equal.
    """
    doc = {
        "tick": model.tick,
        "parameters": model.parameters,
        "environment": {"global": model.environment, "regions": model.regions},
        "agents": [
            {"id": a.id, "agent_type": a.agent_type, "attributes": a.attributes}
            for a in model.agents
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
