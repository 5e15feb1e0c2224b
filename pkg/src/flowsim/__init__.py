"""Scenario-driven agent-based simulation engine.

The experimental unit is a Scenario: input parameters, a set of policies
(condition/action rules swept over agents each tick) and one behaviour-flow
graph per agent type. Scenarios can be batch-executed with reproducible
seeds, compared side by side, and served over an HTTP API.
"""

from flowsim.diagnostics import Diagnostic
from flowsim.kernel import (
    AgentState,
    AgentTypeDef,
    AttributeSpec,
    ModelState,
    canonical_state,
    create_model,
    step,
)
from flowsim.flows import (
    BehaviourFlow,
    FlowEdge,
    FlowNode,
    generate_raw_flow,
    parse_graphml,
    serialize_graphml,
    traverse,
    validate_flow,
)
from flowsim.policies import (
    Condition,
    Policy,
    PolicyAction,
    apply_actions,
    is_eligible,
    sweep,
    validate_policy,
)
from flowsim.scenario import (
    ComparisonTable,
    Scenario,
    SimulationSettings,
    compare,
    flow_fingerprint,
    load_scenario,
    save_scenario,
    validate_scenario,
)
from flowsim.batch import (
    AggregateSeries,
    ModelBundle,
    Reporter,
    RunResult,
    RunSpec,
    aggregate,
    derive_seed,
    execute_batch,
    execute_run,
    load_result,
    persist_result,
    plan_batch,
    sample_ticks,
)

__all__ = [
    "AgentState",
    "AgentTypeDef",
    "AggregateSeries",
    "AttributeSpec",
    "BehaviourFlow",
    "ComparisonTable",
    "Condition",
    "Diagnostic",
    "FlowEdge",
    "FlowNode",
    "ModelBundle",
    "ModelState",
    "Policy",
    "PolicyAction",
    "Reporter",
    "RunResult",
    "RunSpec",
    "Scenario",
    "SimulationSettings",
    "aggregate",
    "apply_actions",
    "canonical_state",
    "compare",
    "create_model",
    "derive_seed",
    "execute_batch",
    "execute_run",
    "flow_fingerprint",
    "generate_raw_flow",
    "is_eligible",
    "load_result",
    "load_scenario",
    "parse_graphml",
    "persist_result",
    "plan_batch",
    "sample_ticks",
    "save_scenario",
    "serialize_graphml",
    "step",
    "sweep",
    "traverse",
    "validate_flow",
    "validate_policy",
    "validate_scenario",
]
