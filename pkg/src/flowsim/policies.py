"""Policies: per-tick eligibility checks and attribute actions.

A policy is a conjunction of attribute conditions plus an ordered list of
actions, applied to every eligible agent of its type each tick. An empty
condition list matches the whole population of the type. Policies run in
declaration order with visible intermediate effects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from flowsim.diagnostics import Diagnostic
from flowsim.kernel import (
    NUMERIC_TAGS,
    AgentState,
    AgentTypeDef,
    ModelState,
    check_tag,
)

ORDERING_OPS = ("lt", "le", "gt", "ge")
ALL_OPS = ("eq", "ne", "lt", "le", "gt", "ge", "in_set")
VERBS = ("set", "add", "mul")


class PolicyError(Exception):
    """Run-time policy failure (tag mismatch reached without validation)."""


def _require_numeric(value: Any, context: str) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise PolicyError(f"{context}: expected a numeric value, got {value!r}")


@dataclass(frozen=True)
class Condition:
    attribute: str
    op: str
    value: Any  # scalar, or list of scalars for in_set

    def holds(self, agent: AgentState) -> bool:
        if self.attribute not in agent.attributes:
            raise PolicyError(f"agent has no attribute {self.attribute!r}")
        actual = agent.attributes[self.attribute]
        if self.op == "eq":
            return actual == self.value
        if self.op == "ne":
            return actual != self.value
        if self.op == "in_set":
            return actual in self.value
        if self.op in ORDERING_OPS:
            _require_numeric(actual, f"condition {self.op} on {self.attribute!r}")
            _require_numeric(self.value, f"condition {self.op} on {self.attribute!r}")
            if self.op == "lt":
                return actual < self.value
            if self.op == "le":
                return actual <= self.value
            if self.op == "gt":
                return actual > self.value
            return actual >= self.value
        raise PolicyError(f"unknown condition op: {self.op!r}")


@dataclass(frozen=True)
class PolicyAction:
    attribute: str
    verb: str
    value: Any

    def apply(self, agent: AgentState) -> None:
        if self.attribute not in agent.attributes:
            raise PolicyError(f"agent has no attribute {self.attribute!r}")
        if self.verb == "set":
            agent.attributes[self.attribute] = self.value
            return
        current = agent.attributes[self.attribute]
        _require_numeric(current, f"action {self.verb} on {self.attribute!r}")
        _require_numeric(self.value, f"action {self.verb} on {self.attribute!r}")
        if self.verb == "add":
            agent.attributes[self.attribute] = current + self.value
        elif self.verb == "mul":
            agent.attributes[self.attribute] = current * self.value
        else:
            raise PolicyError(f"unknown action verb: {self.verb!r}")


@dataclass
class Policy:
    name: str
    agent_type: str
    conditions: list[Condition] = field(default_factory=list)
    actions: list[PolicyAction] = field(default_factory=list)
    active_from: int | None = None
    active_until: int | None = None  # exclusive

    def to_json(self) -> dict:
        doc: dict[str, Any] = {
            "name": self.name,
            "agent_type": self.agent_type,
            "conditions": [
                {"attribute": c.attribute, "op": c.op, "value": c.value}
                for c in self.conditions
            ],
            "actions": [
                {"attribute": a.attribute, "verb": a.verb, "value": a.value}
                for a in self.actions
            ],
        }
        if self.active_from is not None:
            doc["active_from"] = self.active_from
        if self.active_until is not None:
            doc["active_until"] = self.active_until
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Policy":
        for key in ("name", "agent_type"):
            if key not in doc:
                raise ValueError(f"policy missing required field {key!r}")
        return cls(
            name=doc["name"],
            agent_type=doc["agent_type"],
            conditions=[
                Condition(c["attribute"], c["op"], c["value"])
                for c in doc.get("conditions", [])
            ],
            actions=[
                PolicyAction(a["attribute"], a["verb"], a["value"])
                for a in doc.get("actions", [])
            ],
            active_from=doc.get("active_from"),
            active_until=doc.get("active_until"),
        )


def is_eligible(policy: Policy, agent: AgentState, tick: int) -> bool:
    """True iff type matches, tick lies in the active window and every
    condition holds (empty conjunction is universally true)."""
    if agent.agent_type != policy.agent_type:
        return False
    if policy.active_from is not None and tick < policy.active_from:
        return False
    if policy.active_until is not None and tick >= policy.active_until:
        return False
    return all(c.holds(agent) for c in policy.conditions)


def apply_actions(policy: Policy, agent: AgentState) -> None:
    for action in policy.actions:
        action.apply(agent)


def sweep(policies: list[Policy], model: ModelState) -> None:
    """Apply each policy in declaration order over agents in id order;
    later policies observe earlier policies' effects."""
    for policy in policies:
        for agent in model.agents:
            if is_eligible(policy, agent, model.tick):
                apply_actions(policy, agent)


def validate_policy(policy: Policy, type_def: AgentTypeDef) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    schema = type_def.schema_map
    where = policy.name
    if policy.agent_type != type_def.name:
        out.append(Diagnostic("wrong-agent-type", f"policy targets {policy.agent_type!r}, validated against {type_def.name!r}", where))
        return out
    if not policy.actions:
        out.append(Diagnostic("empty-actions", "policy has no actions", where))
    if (
        policy.active_from is not None
        and policy.active_until is not None
        and policy.active_until <= policy.active_from
    ):
        out.append(Diagnostic("inverted-window", f"active window [{policy.active_from}, {policy.active_until}) is empty", where))
    for c in policy.conditions:
        spec = schema.get(c.attribute)
        if spec is None:
            out.append(Diagnostic("unknown-attribute", f"condition references unknown attribute {c.attribute!r}", where))
            continue
        if c.op not in ALL_OPS:
            out.append(Diagnostic("unknown-op", f"unknown condition op {c.op!r}", where))
        elif c.op in ORDERING_OPS:
            if spec.tag not in NUMERIC_TAGS:
                out.append(Diagnostic("tag-mismatch", f"ordering op {c.op!r} on non-numeric attribute {c.attribute!r} ({spec.tag})", where))
        elif c.op == "in_set":
            if not isinstance(c.value, (list, tuple, set)) or not all(check_tag(v, spec.tag) for v in c.value):
                out.append(Diagnostic("tag-mismatch", f"in_set on {c.attribute!r} requires a set of {spec.tag} values", where))
        elif not check_tag(c.value, spec.tag):
            out.append(Diagnostic("tag-mismatch", f"condition value {c.value!r} does not match tag {spec.tag!r} of {c.attribute!r}", where))
    for a in policy.actions:
        spec = schema.get(a.attribute)
        if spec is None:
            out.append(Diagnostic("unknown-attribute", f"action references unknown attribute {a.attribute!r}", where))
            continue
        if a.verb not in VERBS:
            out.append(Diagnostic("unknown-verb", f"unknown action verb {a.verb!r}", where))
        elif a.verb in ("add", "mul"):
            if spec.tag not in NUMERIC_TAGS:
                out.append(Diagnostic("tag-mismatch", f"{a.verb} on non-numeric attribute {a.attribute!r} ({spec.tag})", where))
            elif isinstance(a.value, bool) or not isinstance(a.value, (int, float)):
                out.append(Diagnostic("tag-mismatch", f"{a.verb} value {a.value!r} is not numeric", where))
        elif not check_tag(a.value, spec.tag):
            out.append(Diagnostic("tag-mismatch", f"set value {a.value!r} does not match tag {spec.tag!r} of {a.attribute!r}", where))
    return out
