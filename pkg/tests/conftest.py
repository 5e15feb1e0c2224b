import random
from pathlib import Path

import pytest

from flowsim.demo import baseline_scenario, build_demo_bundle, jobseeker_scenario
from flowsim.flows import generate_raw_flow, serialize_graphml
from flowsim.kernel import AgentState, AgentTypeDef, AttributeSpec

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def bundle():
    return build_demo_bundle()


@pytest.fixture
def scenarios():
    return [baseline_scenario(), jobseeker_scenario()]


@pytest.fixture
def flow_corpus(bundle):
    """(name, xml_text) pairs: raw generated + on-disk fixture files."""
    corpus = [("raw", serialize_graphml(generate_raw_flow(bundle.type_defs[0])))]
    for path in sorted(FIXTURES.glob("*.graphml")):
        corpus.append((path.stem, path.read_text(encoding="utf-8")))
    return corpus


def counter_type(name="widget"):
    """Tiny deterministic agent type for kernel-level tests."""

    def inc_c(agent, model, rng):
        agent.attributes["c"] += 1

    def copy_x_to_y(agent, model, rng):
        agent.attributes["y"] = agent.attributes["x"]

    def noisy(agent, model, rng):
        agent.attributes["x"] += rng.random()

    return AgentTypeDef(
        name=name,
        attribute_schema=[
            AttributeSpec("c", "int", 0),
            AttributeSpec("x", "real", 0.0),
            AttributeSpec("y", "real", 0.0),
        ],
        behaviors={"inc_c": inc_c, "copy_x_to_y": copy_x_to_y, "noisy": noisy},
    )


def make_agent(agent_id=0, agent_type="migrant", **attributes) -> AgentState:
    return AgentState(id=agent_id, agent_type=agent_type, attributes=attributes)


def fresh_rng(seed=0) -> random.Random:
    return random.Random(seed)
