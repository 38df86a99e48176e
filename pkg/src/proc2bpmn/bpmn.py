"""Compile a process table into a BPMN model, lay it out and serialize it.

The model is a pool with one lane per participant, tasks chained by sequence
flows, and exclusive gateway pairs around branch blocks. Every diverging
gateway carries one condition-labeled flow per branch plus one unlabeled
default flow to its converging gateway, so a viewer always sees an escape
path out of the decision. Layout is layered left-to-right with lane bands
stacked top-down; serialization emits BPMN 2.0 XML with Diagram Interchange
and is byte-stable for identical input.
"""

from __future__ import annotations

import enum
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace

from .errors import EmptyProcess, UnlaidModel
from .lexicon import Lexicon, VerbType, load_lexicon
from .process_table import END_MARKER, START_ACTIVITY, ProcessTable, TableRow

NS_MODEL = "http://www.omg.org/spec/BPMN/20100524/MODEL"
NS_DI = "http://www.omg.org/spec/BPMN/20100524/DI"
NS_DC = "http://www.omg.org/spec/DD/20100524/DC"
NS_DDI = "http://www.omg.org/spec/DD/20100524/DI"
NS_EXT = "urn:proc2bpmn:ext"

# geometry constants (pixels, origin top-left)
COLUMN_X0 = 60
COLUMN_PITCH = 160
LANE_BAND = 120
POOL_X = 20
POOL_Y = 20
LANE_LABEL_INSET = 30
POOL_RIGHT_MARGIN = 60

TASK_SIZE = (100, 80)
EVENT_SIZE = (36, 36)
GATEWAY_SIZE = (50, 50)


class NodeKind(enum.Enum):
    START_EVENT = "startEvent"
    END_EVENT = "endEvent"
    TASK = "task"
    EXCLUSIVE_GATEWAY = "exclusiveGateway"


NODE_SIZES = {
    NodeKind.START_EVENT: EVENT_SIZE,
    NodeKind.END_EVENT: EVENT_SIZE,
    NodeKind.TASK: TASK_SIZE,
    NodeKind.EXCLUSIVE_GATEWAY: GATEWAY_SIZE,
}


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    label: str
    geometry: tuple[int, int, int, int] | None = None
    verb_class: str | None = None


@dataclass(frozen=True)
class SequenceFlow:
    id: str
    source: str
    target: str
    condition_label: str = ""
    waypoints: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class Lane:
    id: str
    name: str
    node_ids: tuple[str, ...]
    geometry: tuple[int, int, int, int] | None = None


@dataclass(frozen=True)
class BpmnModel:
    process_id: str
    pool_name: str
    lanes: tuple[Lane, ...]
    nodes: tuple[Node, ...]
    flows: tuple[SequenceFlow, ...]
    pool_geometry: tuple[int, int, int, int] | None = None

    def node_by_id(self, node_id: str) -> Node:
        return next(n for n in self.nodes if n.id == node_id)


class _Builder:
    def __init__(self):
        self.nodes: list[Node] = []
        self.flows: list[SequenceFlow] = []
        self.who: dict[str, str] = {}
        self._counters: dict[str, int] = {}

    def _next_id(self, kind: str) -> str:
        self._counters[kind] = self._counters.get(kind, 0) + 1
        return f"{kind}_{self._counters[kind]}"

    def node(self, kind: NodeKind, label: str = "", who: str = "", verb_class: str | None = None) -> Node:
        node = Node(id=self._next_id(kind.value), kind=kind, label=label, verb_class=verb_class)
        self.nodes.append(node)
        if who:
            self.who[node.id] = who
        return node

    def flow(self, source: Node, target: Node, condition: str = "") -> SequenceFlow:
        flow = SequenceFlow(
            id=self._next_id("sequenceFlow"),
            source=source.id,
            target=target.id,
            condition_label=condition,
        )
        self.flows.append(flow)
        return flow


def _row_groups(rows: tuple[TableRow, ...]) -> list[tuple[str, object]]:
    """Rows grouped for compilation: start, terminated, plain, branch blocks."""
    groups: list[tuple[str, object]] = []
    branch_seqs: dict[int, dict[str, list[TableRow]]] = {}
    for row in rows:
        if row.activity == START_ACTIVITY and row.order.branch is None:
            groups.append(("start", row))
        elif row.terminated == "yes":
            groups.append(("terminated", row))
        elif row.order.branch is not None:
            block = branch_seqs.setdefault(row.order.seq, {})
            if not block:
                groups.append(("branch", block))
            block.setdefault(row.order.branch, []).append(row)
        else:
            groups.append(("plain", row))
    return groups


def build_model(
    table: ProcessTable,
    lexicon: Lexicon | None = None,
    pool_name: str = "process",
) -> BpmnModel:
    """Compile a valid process table into a BPMN model (geometry not yet set).

    Raises:
        EmptyProcess: the table has no rows.
        ValueError: a fully terminating branch block leaves later rows
            unreachable.
    """
    if not table.rows:
        raise EmptyProcess("cannot compile an empty table")
    lexicon = lexicon or load_lexicon()

    builder = _Builder()
    start = builder.node(NodeKind.START_EVENT)
    previous = start

    def task_for(row: TableRow) -> Node:
        verb = row.activity.split()[0].lower() if row.activity else ""
        verb_class = (
            "message" if lexicon.classify_verb(verb) is VerbType.MESSAGE else None
        )
        return builder.node(NodeKind.TASK, label=row.activity, who=row.who, verb_class=verb_class)

    saw_terminated = False
    for kind, payload in _row_groups(table.rows):
        if kind == "start":
            continue
        if kind == "terminated":
            saw_terminated = True
            continue
        if kind == "plain":
            row = payload
            if row.condition:
                # optional task: a gateway pair with the conditioned chain on
                # one path and the default flow skipping it
                diverge = builder.node(NodeKind.EXCLUSIVE_GATEWAY)
                builder.flow(previous, diverge)
                task = task_for(row)
                builder.flow(diverge, task, condition=row.condition)
                converge = builder.node(NodeKind.EXCLUSIVE_GATEWAY)
                builder.flow(task, converge)
                builder.flow(diverge, converge)
                previous = converge
            else:
                task = task_for(row)
                builder.flow(previous, task)
                previous = task
            continue

        # branch block
        block: dict[str, list[TableRow]] = payload
        diverge = builder.node(NodeKind.EXCLUSIVE_GATEWAY)
        builder.flow(previous, diverge)
        rejoining: list[Node] = []
        branch_flows: list[tuple[Node, Node, str]] = []
        for letter in sorted(block):
            steps = sorted(block[letter], key=lambda r: r.order.step)
            chain_prev = diverge
            condition = steps[0].condition
            ended = False
            for row in steps:
                if row.activity == END_MARKER:
                    node = builder.node(NodeKind.END_EVENT, who=row.who)
                    ended = True
                else:
                    node = task_for(row)
                branch_flows.append((chain_prev, node, condition if chain_prev is diverge else ""))
                chain_prev = node
            if not ended:
                rejoining.append(chain_prev)
        for source, target, condition in branch_flows:
            builder.flow(source, target, condition=condition)
        if len(rejoining) >= 2:
            converge = builder.node(NodeKind.EXCLUSIVE_GATEWAY)
            for node in rejoining:
                builder.flow(node, converge)
            builder.flow(diverge, converge)
            previous = converge
        elif len(rejoining) == 1:
            previous = rejoining[0]
        else:
            raise ValueError(
                "branch block terminates every branch; rows after it are unreachable"
            )

    end_who = table.rows[-1].who if saw_terminated else ""
    end = builder.node(NodeKind.END_EVENT, who=end_who)
    builder.flow(previous, end)

    lanes = _assign_lanes(builder)
    return BpmnModel(
        process_id="Process_1",
        pool_name=pool_name,
        lanes=lanes,
        nodes=tuple(builder.nodes),
        flows=tuple(builder.flows),
    )


def _assign_lanes(builder: _Builder) -> tuple[Lane, ...]:
    """One lane per distinct non-empty Who; events, gateways and who-less
    tasks take the lane of the nearest preceding who-ful task (the start
    event looks forward instead)."""
    order: list[str] = []
    for node in builder.nodes:
        who = builder.who.get(node.id, "")
        if who and who not in order:
            order.append(who)
    if not order:
        return ()

    assignment: dict[str, str] = {}
    for i, node in enumerate(builder.nodes):
        who = builder.who.get(node.id, "")
        if who:
            assignment[node.id] = who
            continue
        neighbors = (
            builder.nodes[i + 1 :] if node.kind is NodeKind.START_EVENT else reversed(builder.nodes[:i])
        )
        fallback = None
        for other in neighbors:
            other_who = builder.who.get(other.id, "")
            if other_who:
                fallback = other_who
                break
        if fallback is None:
            fallback = order[0] if node.kind is NodeKind.START_EVENT else order[-1]
        assignment[node.id] = fallback

    lanes = []
    for lane_no, who in enumerate(order, start=1):
        members = tuple(n.id for n in builder.nodes if assignment[n.id] == who)
        lanes.append(Lane(id=f"lane_{lane_no}", name=who, node_ids=members))
    return tuple(lanes)


def validate_model(model: BpmnModel) -> list[str]:
    """Well-formedness checks: arities, reachability, lane partition."""
    problems: list[str] = []
    ids = [n.id for n in model.nodes]
    if len(set(ids)) != len(ids):
        problems.append("duplicate node ids")
    by_id = {n.id: n for n in model.nodes}

    incoming: dict[str, int] = {n.id: 0 for n in model.nodes}
    outgoing: dict[str, int] = {n.id: 0 for n in model.nodes}
    for flow in model.flows:
        if flow.source not in by_id or flow.target not in by_id:
            problems.append(f"flow {flow.id} references a missing node")
            continue
        outgoing[flow.source] += 1
        incoming[flow.target] += 1
        if flow.condition_label and by_id[flow.source].kind is not NodeKind.EXCLUSIVE_GATEWAY:
            problems.append(f"flow {flow.id}: condition label on a non-gateway source")

    starts = [n for n in model.nodes if n.kind is NodeKind.START_EVENT]
    ends = [n for n in model.nodes if n.kind is NodeKind.END_EVENT]
    if len(starts) != 1:
        problems.append(f"expected exactly one start event, found {len(starts)}")
    if not ends:
        problems.append("expected at least one end event")

    for node in model.nodes:
        arity = (incoming[node.id], outgoing[node.id])
        if node.kind is NodeKind.TASK and arity != (1, 1):
            problems.append(f"task {node.id} has in/out degree {arity}, expected (1, 1)")
        elif node.kind is NodeKind.START_EVENT and arity != (0, 1):
            problems.append(f"start event {node.id} has in/out degree {arity}, expected (0, 1)")
        elif node.kind is NodeKind.END_EVENT and (arity[0] < 1 or arity[1] != 0):
            problems.append(f"end event {node.id} has in/out degree {arity}")
        elif node.kind is NodeKind.EXCLUSIVE_GATEWAY:
            diverging = arity[0] == 1 and arity[1] >= 2
            converging = arity[0] >= 2 and arity[1] == 1
            if not (diverging or converging):
                problems.append(f"gateway {node.id} has in/out degree {arity}")

    if starts:
        forward = {n.id: set() for n in model.nodes}
        backward = {n.id: set() for n in model.nodes}
        for flow in model.flows:
            if flow.source in by_id and flow.target in by_id:
                forward[flow.source].add(flow.target)
                backward[flow.target].add(flow.source)
        reach_from_start = _closure({starts[0].id}, forward)
        reach_to_end = _closure({n.id for n in ends}, backward)
        for node in model.nodes:
            if node.id not in reach_from_start or node.id not in reach_to_end:
                problems.append(f"node {node.id} is not on a start-to-end path")

    if model.lanes:
        assigned: list[str] = []
        for lane in model.lanes:
            assigned.extend(lane.node_ids)
        if sorted(assigned) != sorted(ids):
            problems.append("lane membership is not a partition of the nodes")
        names = [lane.name for lane in model.lanes]
        if len(set(names)) != len(names):
            problems.append("duplicate lane names")
    return problems


def _closure(seed: set[str], edges: dict[str, set[str]]) -> set[str]:
    seen = set(seed)
    frontier = list(seed)
    while frontier:
        for neighbor in edges[frontier.pop()]:
            if neighbor not in seen:
                seen.add(neighbor)
                frontier.append(neighbor)
    return seen


def layout(model: BpmnModel) -> BpmnModel:
    """Assign geometry: layered left-to-right, lane bands stacked top-down.

    Column index is the longest-path distance from the start event; x grows by
    a fixed pitch per column; each lane band is tall enough for the busiest
    column it hosts; nodes are centered in their band slot. Re-running the
    layout is deterministic and idempotent.
    """
    columns = _columns(model)
    lane_of: dict[str, str] = {}
    lane_order: list[str] = []
    for lane in model.lanes:
        lane_order.append(lane.id)
        for node_id in lane.node_ids:
            lane_of[node_id] = lane.id
    if not model.lanes:
        lane_order = ["_pool"]
        lane_of = {n.id: "_pool" for n in model.nodes}

    per_slot: dict[tuple[str, int], list[str]] = {}
    for node in model.nodes:
        per_slot.setdefault((lane_of[node.id], columns[node.id]), []).append(node.id)

    band_height: dict[str, int] = {}
    for lane_id in lane_order:
        busiest = max(
            (len(ids) for (l, _), ids in per_slot.items() if l == lane_id), default=1
        )
        band_height[lane_id] = LANE_BAND * busiest

    band_top: dict[str, int] = {}
    y = POOL_Y
    for lane_id in lane_order:
        band_top[lane_id] = y
        y += band_height[lane_id]
    pool_height = y - POOL_Y

    placed: dict[str, tuple[int, int, int, int]] = {}
    for (lane_id, column), ids in per_slot.items():
        group_top = band_top[lane_id] + (band_height[lane_id] - LANE_BAND * len(ids)) // 2
        for slot, node_id in enumerate(ids):
            node = model.node_by_id(node_id)
            width, height = NODE_SIZES[node.kind]
            x = COLUMN_X0 + column * COLUMN_PITCH
            node_y = group_top + slot * LANE_BAND + (LANE_BAND - height) // 2
            placed[node_id] = (x, node_y, width, height)

    right_edge = max((g[0] + g[2] for g in placed.values()), default=POOL_X) + POOL_RIGHT_MARGIN
    pool_geometry = (POOL_X, POOL_Y, right_edge - POOL_X, pool_height)

    new_nodes = tuple(replace(n, geometry=placed[n.id]) for n in model.nodes)
    new_lanes = tuple(
        replace(
            lane,
            geometry=(
                POOL_X + LANE_LABEL_INSET,
                band_top[lane.id],
                right_edge - POOL_X - LANE_LABEL_INSET,
                band_height[lane.id],
            ),
        )
        for lane in model.lanes
    )

    new_flows = []
    for flow in model.flows:
        sx, sy, sw, sh = placed[flow.source]
        tx, ty, tw, th = placed[flow.target]
        source_point = (sx + sw, sy + sh // 2)
        target_point = (tx, ty + th // 2)
        if source_point[1] == target_point[1]:
            waypoints = (source_point, target_point)
        else:
            waypoints = (source_point, (tx, source_point[1]), target_point)
        new_flows.append(replace(flow, waypoints=waypoints))

    return replace(
        model,
        nodes=new_nodes,
        lanes=new_lanes,
        flows=tuple(new_flows),
        pool_geometry=pool_geometry,
    )


def _columns(model: BpmnModel) -> dict[str, int]:
    """Longest-path distance from the start event (flows form a DAG)."""
    columns = {n.id: 0 for n in model.nodes}
    outgoing: dict[str, list[str]] = {n.id: [] for n in model.nodes}
    indegree = {n.id: 0 for n in model.nodes}
    for flow in model.flows:
        outgoing[flow.source].append(flow.target)
        indegree[flow.target] += 1
    ready = [n.id for n in model.nodes if indegree[n.id] == 0]
    while ready:
        node_id = ready.pop()
        for target in outgoing[node_id]:
            columns[target] = max(columns[target], columns[node_id] + 1)
            indegree[target] -= 1
            if indegree[target] == 0:
                ready.append(target)
    return columns


def serialize_xml(model: BpmnModel) -> bytes:
    """BPMN 2.0 XML with Diagram Interchange; byte-stable across runs.

    Raises:
        UnlaidModel: a node is missing geometry (run layout first).
    """
    for node in model.nodes:
        if node.geometry is None:
            raise UnlaidModel(f"node {node.id} has no geometry")
    if model.pool_geometry is None:
        raise UnlaidModel("model has no pool geometry")

    for prefix, uri in (
        ("bpmn", NS_MODEL),
        ("bpmndi", NS_DI),
        ("dc", NS_DC),
        ("di", NS_DDI),
        ("ext", NS_EXT),
    ):
        ET.register_namespace(prefix, uri)

    definitions = ET.Element(
        f"{{{NS_MODEL}}}definitions",
        {"id": "Definitions_1", "targetNamespace": "urn:proc2bpmn:definitions"},
    )
    collaboration = ET.SubElement(definitions, f"{{{NS_MODEL}}}collaboration", {"id": "Collaboration_1"})
    ET.SubElement(
        collaboration,
        f"{{{NS_MODEL}}}participant",
        {"id": "Participant_1", "name": model.pool_name, "processRef": model.process_id},
    )

    process = ET.SubElement(
        definitions, f"{{{NS_MODEL}}}process", {"id": model.process_id, "isExecutable": "false"}
    )
    if model.lanes:
        lane_set = ET.SubElement(process, f"{{{NS_MODEL}}}laneSet", {"id": "LaneSet_1"})
        for lane in model.lanes:
            lane_el = ET.SubElement(lane_set, f"{{{NS_MODEL}}}lane", {"id": lane.id, "name": lane.name})
            for node_id in lane.node_ids:
                ET.SubElement(lane_el, f"{{{NS_MODEL}}}flowNodeRef").text = node_id

    for node in model.nodes:
        attrs = {"id": node.id}
        if node.label:
            attrs["name"] = node.label
        if node.verb_class:
            attrs[f"{{{NS_EXT}}}verbClass"] = node.verb_class
        ET.SubElement(process, f"{{{NS_MODEL}}}{node.kind.value}", attrs)

    for flow in model.flows:
        attrs = {"id": flow.id, "sourceRef": flow.source, "targetRef": flow.target}
        if flow.condition_label:
            attrs["name"] = flow.condition_label
        flow_el = ET.SubElement(process, f"{{{NS_MODEL}}}sequenceFlow", attrs)
        if flow.condition_label:
            ET.SubElement(flow_el, f"{{{NS_MODEL}}}conditionExpression").text = flow.condition_label

    diagram = ET.SubElement(definitions, f"{{{NS_DI}}}BPMNDiagram", {"id": "BPMNDiagram_1"})
    plane = ET.SubElement(
        diagram, f"{{{NS_DI}}}BPMNPlane", {"id": "BPMNPlane_1", "bpmnElement": "Collaboration_1"}
    )

    def shape(element_id: str, bounds: tuple[int, int, int, int], horizontal: bool = False) -> None:
        attrs = {"id": f"{element_id}_di", "bpmnElement": element_id}
        if horizontal:
            attrs["isHorizontal"] = "true"
        shape_el = ET.SubElement(plane, f"{{{NS_DI}}}BPMNShape", attrs)
        ET.SubElement(
            shape_el,
            f"{{{NS_DC}}}Bounds",
            {
                "x": str(bounds[0]),
                "y": str(bounds[1]),
                "width": str(bounds[2]),
                "height": str(bounds[3]),
            },
        )

    shape("Participant_1", model.pool_geometry, horizontal=True)
    for lane in model.lanes:
        if lane.geometry is not None:
            shape(lane.id, lane.geometry, horizontal=True)
    for node in model.nodes:
        shape(node.id, node.geometry)
    for flow in model.flows:
        edge = ET.SubElement(
            plane, f"{{{NS_DI}}}BPMNEdge", {"id": f"{flow.id}_di", "bpmnElement": flow.id}
        )
        for x, y in flow.waypoints:
            ET.SubElement(edge, f"{{{NS_DDI}}}waypoint", {"x": str(x), "y": str(y)})

    tree = ET.ElementTree(definitions)
    ET.indent(tree, space="  ")
    buffer = ET.tostring(definitions, encoding="UTF-8", xml_declaration=True)
    return buffer + b"\n"
