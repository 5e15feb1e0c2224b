"""Behaviour-flow graphs: parse, validate, generate, serialize, execute.

A flow is a directed graph over an agent type's named behaviors. Per tick
an agent walks the graph from the start node: at each behavior node the
behavior executes with the node's execution probability (a skip still
transitions onward), and the next node is chosen among outgoing edges with
probability weight / sum(weights). The walk ends at a node without
outgoing edges or after `max_visits_per_tick` node visits (cycle guard).

Flows are stored as GraphML. The engine's dialect uses node data keys
`label` (behavior name, or "start") and `p` (execution probability) and
the edge data key `w` (transition weight). On input, yEd-style embedded
<y:NodeLabel> text is accepted when no plain `label` key is present;
unknown keys are ignored.
"""

from __future__ import annotations

import random
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Callable

from flowsim.diagnostics import Diagnostic
from flowsim.kernel import AgentState, AgentTypeDef, ModelState

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"

START_LABEL = "start"
TERMINAL_LABELS = ("end", "stop")


class FlowParseError(Exception):
    """Raised when a GraphML document cannot be turned into a valid flow."""


@dataclass(frozen=True)
class FlowNode:
    node_id: str
    kind: str  # "start" | "behavior" | "terminal"
    behavior_name: str | None = None
    exec_probability: float = 1.0


@dataclass(frozen=True)
class FlowEdge:
    source: str
    target: str
    weight: float = 1.0


@dataclass
class BehaviourFlow:
    agent_type: str
    nodes: list[FlowNode]
    edges: list[FlowEdge]
    max_visits_per_tick: int = 0  # 0 -> default 4 * |nodes|

    def __post_init__(self):
        if self.max_visits_per_tick <= 0:
            self.max_visits_per_tick = 4 * max(len(self.nodes), 1)

    @property
    def start_id(self) -> str:
        for n in self.nodes:
            if n.kind == "start":
                return n.node_id
        raise FlowParseError("flow has no start node")

    def node_map(self) -> dict[str, FlowNode]:
        return {n.node_id: n for n in self.nodes}


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _classify(label: str) -> tuple[str, str | None]:
    low = label.strip().lower()
    if low == START_LABEL:
        return "start", None
    if low in TERMINAL_LABELS or low == "":
        return "terminal", None
    return "behavior", label.strip()


def _embedded_label(data_el: ET.Element) -> str | None:
    # yEd stores the visible text in a nested <y:NodeLabel> element
    for sub in data_el.iter():
        if _strip_ns(sub.tag) == "NodeLabel" and sub.text and sub.text.strip():
            return sub.text.strip()
    return None


def parse_graphml(xml_text: str, agent_type: str = "", max_visits_per_tick: int = 0) -> BehaviourFlow:
    """Parse a GraphML document into a BehaviourFlow.

    The start node is the node labeled "start" (case-insensitive) or, if
    absent, the unique node with in-degree 0.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as e:
        raise FlowParseError(f"malformed XML: {e}") from e
    if _strip_ns(root.tag) != "graphml":
        raise FlowParseError("not a GraphML document (missing <graphml> root)")

    # resolve <key> declarations: element key id -> attr.name
    key_names: dict[str, str] = {}
    for el in root:
        if _strip_ns(el.tag) == "key":
            kid = el.get("id")
            if kid:
                key_names[kid] = el.get("attr.name", kid)

    graph = None
    for el in root.iter():
        if _strip_ns(el.tag) == "graph":
            graph = el
            break
    if graph is None:
        raise FlowParseError("GraphML document contains no <graph>")
    flow_type = agent_type or graph.get("id", "") or ""

    raw_nodes: list[tuple[str, str, float]] = []  # (id, label, p)
    edges: list[FlowEdge] = []
    seen_ids: set[str] = set()
    for el in graph:
        tag = _strip_ns(el.tag)
        if tag == "node":
            nid = el.get("id")
            if nid is None:
                raise FlowParseError("node without id")
            if nid in seen_ids:
                raise FlowParseError(f"duplicate node id: {nid!r}")
            seen_ids.add(nid)
            label = ""
            prob = 1.0
            embedded = None
            for d in el:
                if _strip_ns(d.tag) != "data":
                    continue
                name = key_names.get(d.get("key", ""), d.get("key", ""))
                if name == "label":
                    label = (d.text or "").strip()
                elif name == "p":
                    try:
                        prob = float((d.text or "").strip())
                    except ValueError:
                        raise FlowParseError(f"node {nid!r}: bad probability {d.text!r}")
                elif embedded is None:
                    embedded = _embedded_label(d)
            if not label and embedded:
                label = embedded
            if not 0.0 <= prob <= 1.0:
                raise FlowParseError(f"node {nid!r}: probability {prob} outside [0,1]")
            raw_nodes.append((nid, label, prob))
        elif tag == "edge":
            src, tgt = el.get("source"), el.get("target")
            if src is None or tgt is None:
                raise FlowParseError("edge missing source/target")
            weight = 1.0
            for d in el:
                if _strip_ns(d.tag) != "data":
                    continue
                name = key_names.get(d.get("key", ""), d.get("key", ""))
                if name == "w":
                    try:
                        weight = float((d.text or "").strip())
                    except ValueError:
                        raise FlowParseError(f"edge {src}->{tgt}: bad weight {d.text!r}")
            if weight <= 0:
                raise FlowParseError(f"edge {src}->{tgt}: non-positive weight {weight}")
            edges.append(FlowEdge(source=src, target=tgt, weight=weight))

    node_ids = {nid for nid, _, _ in raw_nodes}
    for e in edges:
        if e.source not in node_ids or e.target not in node_ids:
            raise FlowParseError(f"edge {e.source}->{e.target} references missing node")

    labeled_start = [nid for nid, label, _ in raw_nodes if label.strip().lower() == START_LABEL]
    if len(labeled_start) > 1:
        raise FlowParseError("multiple nodes labeled 'start'")
    if labeled_start:
        start_id = labeled_start[0]
    else:
        indeg = {nid: 0 for nid in node_ids}
        for e in edges:
            indeg[e.target] += 1
        roots = [nid for nid, d in indeg.items() if d == 0]
        if len(roots) != 1:
            raise FlowParseError("no identifiable start node (no 'start' label, no unique in-degree-0 node)")
        start_id = roots[0]

    nodes: list[FlowNode] = []
    for nid, label, prob in raw_nodes:
        if nid == start_id:
            nodes.append(FlowNode(node_id=nid, kind="start", exec_probability=prob))
        else:
            kind, behavior = _classify(label)
            if kind == "start":  # only reachable if start was chosen by in-degree
                kind, behavior = "terminal", None
            nodes.append(FlowNode(node_id=nid, kind=kind, behavior_name=behavior, exec_probability=prob))

    return BehaviourFlow(
        agent_type=flow_type,
        nodes=nodes,
        edges=edges,
        max_visits_per_tick=max_visits_per_tick,
    )


def serialize_graphml(flow: BehaviourFlow) -> str:
    """Emit the engine's plain GraphML dialect, nodes/edges sorted by id."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<graphml xmlns="{GRAPHML_NS}">',
        '  <key id="label" for="node" attr.name="label" attr.type="string"/>',
        '  <key id="p" for="node" attr.name="p" attr.type="double"/>',
        '  <key id="w" for="edge" attr.name="w" attr.type="double"/>',
        f'  <graph id="{flow.agent_type}" edgedefault="directed">',
    ]
    for n in sorted(flow.nodes, key=lambda n: n.node_id):
        if n.kind == "start":
            label = START_LABEL
        elif n.kind == "terminal":
            label = TERMINAL_LABELS[0]
        else:
            label = n.behavior_name or ""
        lines.append(f'    <node id="{n.node_id}">')
        lines.append(f'      <data key="label">{label}</data>')
        if n.exec_probability != 1.0:
            lines.append(f'      <data key="p">{n.exec_probability!r}</data>')
        lines.append("    </node>")
    for e in sorted(flow.edges, key=lambda e: (e.source, e.target)):
        if e.weight != 1.0:
            lines.append(f'    <edge source="{e.source}" target="{e.target}">')
            lines.append(f'      <data key="w">{e.weight!r}</data>')
            lines.append("    </edge>")
        else:
            lines.append(f'    <edge source="{e.source}" target="{e.target}"/>')
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def generate_raw_flow(type_def: AgentTypeDef) -> BehaviourFlow:
    """Default flow: start fans out to every behavior, one uniform choice per tick."""
    if not type_def.behaviors:
        raise ValueError(f"agent type {type_def.name!r} has no behaviors")
    nodes = [FlowNode(node_id="start", kind="start")]
    edges = []
    for i, name in enumerate(type_def.behaviors):
        nid = f"b{i}"
        nodes.append(FlowNode(node_id=nid, kind="behavior", behavior_name=name))
        edges.append(FlowEdge(source="start", target=nid, weight=1.0))
    return BehaviourFlow(agent_type=type_def.name, nodes=nodes, edges=edges)


def sequential_flow(type_def: AgentTypeDef, behavior_order: list[str] | None = None) -> BehaviourFlow:
    """Linear chain start -> b1 -> b2 -> ..., every behavior once per tick."""
    order = behavior_order if behavior_order is not None else list(type_def.behaviors)
    nodes = [FlowNode(node_id="start", kind="start")]
    edges = []
    prev = "start"
    for i, name in enumerate(order):
        nid = f"b{i}"
        nodes.append(FlowNode(node_id=nid, kind="behavior", behavior_name=name))
        edges.append(FlowEdge(source=prev, target=nid, weight=1.0))
        prev = nid
    return BehaviourFlow(agent_type=type_def.name, nodes=nodes, edges=edges)


def validate_flow(flow: BehaviourFlow, type_def: AgentTypeDef | None = None) -> list[Diagnostic]:
    """Structural and binding diagnostics; empty list means bindable."""
    out: list[Diagnostic] = []
    ids = [n.node_id for n in flow.nodes]
    if len(ids) != len(set(ids)):
        out.append(Diagnostic("duplicate-node-id", "node ids are not unique"))
    starts = [n for n in flow.nodes if n.kind == "start"]
    if len(starts) != 1:
        out.append(Diagnostic("missing-start", f"expected exactly one start node, found {len(starts)}"))
    id_set = set(ids)
    for e in flow.edges:
        if e.source not in id_set or e.target not in id_set:
            out.append(Diagnostic("dangling-edge", f"edge {e.source}->{e.target} references missing node"))
        if e.weight <= 0:
            out.append(Diagnostic("bad-weight", f"edge {e.source}->{e.target} has non-positive weight {e.weight}"))
    for n in flow.nodes:
        if not 0.0 <= n.exec_probability <= 1.0:
            out.append(Diagnostic("bad-probability", f"node {n.node_id!r} probability {n.exec_probability} outside [0,1]", n.node_id))
        if n.kind == "behavior" and type_def is not None and n.behavior_name not in type_def.behaviors:
            out.append(Diagnostic("unresolved-behavior", f"behavior {n.behavior_name!r} not registered for type {type_def.name!r}", n.node_id))
    # reachability from the start node
    if len(starts) == 1 and len(flow.nodes) > 1:
        adj: dict[str, list[str]] = {nid: [] for nid in id_set}
        for e in flow.edges:
            if e.source in adj and e.target in id_set:
                adj[e.source].append(e.target)
        seen = {starts[0].node_id}
        stack = [starts[0].node_id]
        while stack:
            for t in adj[stack.pop()]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        for nid in ids:
            if nid not in seen:
                out.append(Diagnostic("unreachable-node", f"node {nid!r} has no path from start", nid))
    return out


@dataclass
class BoundFlow:
    """Flow resolved against an agent type: behavior callables and
    cumulative edge-choice tables, immutable and shareable across runs."""

    flow: BehaviourFlow
    start_id: str
    behaviors: dict[str, Callable | None]  # node_id -> fn (None for start/terminal)
    probabilities: dict[str, float]
    # node_id -> list of (cumulative probability, target node_id)
    choices: dict[str, list[tuple[float, str]]]
    max_visits: int

    def traverse(self, agent: AgentState, model: ModelState, rng: random.Random) -> None:
        traverse(self, agent, model, rng)


def bind(flow: BehaviourFlow, type_def: AgentTypeDef) -> BoundFlow:
    """Resolve behavior names and normalize edge weights. Raises on
    diagnostics; call validate_flow first for a soft check."""
    diags = validate_flow(flow, type_def)
    if diags:
        raise FlowParseError("; ".join(d.message for d in diags))
    behaviors: dict[str, Callable | None] = {}
    probabilities: dict[str, float] = {}
    for n in flow.nodes:
        behaviors[n.node_id] = type_def.behaviors[n.behavior_name] if n.kind == "behavior" else None
        probabilities[n.node_id] = n.exec_probability
    outgoing: dict[str, list[FlowEdge]] = {n.node_id: [] for n in flow.nodes}
    for e in flow.edges:
        outgoing[e.source].append(e)
    choices: dict[str, list[tuple[float, str]]] = {}
    for nid, edges in outgoing.items():
        total = sum(e.weight for e in edges)
        table: list[tuple[float, str]] = []
        acc = 0.0
        for e in edges:
            acc += e.weight / total if total else 0.0
            table.append((acc, e.target))
        choices[nid] = table
    return BoundFlow(
        flow=flow,
        start_id=flow.start_id,
        behaviors=behaviors,
        probabilities=probabilities,
        choices=choices,
        max_visits=flow.max_visits_per_tick,
    )


def traverse(bound: BoundFlow, agent: AgentState, model: ModelState, rng: random.Random) -> None:
    """Walk the flow once for one agent.

    Random draws are elided where the outcome is certain (p == 0 or 1,
    single outgoing edge) so that a linear all-p=1 chain consumes exactly
    the same stream as a plain fixed-order loop over the behaviors.
    """
    current = bound.start_id
    visits = 0
    while True:
        visits += 1
        fn = bound.behaviors[current]
        if fn is not None:
            p = bound.probabilities[current]
            if p >= 1.0 or (p > 0.0 and rng.random() < p):
                fn(agent, model, rng)
        table = bound.choices[current]
        if not table:
            return
        if visits >= bound.max_visits:
            model.metrics["flow_truncations"] = model.metrics.get("flow_truncations", 0) + 1
            return
        if len(table) == 1:
            current = table[0][1]
        else:
            r = rng.random()
            for cum, target in table:
                if r < cum:
                    current = target
                    break
            else:
                current = table[-1][1]
