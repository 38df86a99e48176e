"""Test-only utilities: a structural BPMN XML reader and a random-table generator."""

from __future__ import annotations

import random
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from proc2bpmn.bpmn import BpmnModel
from proc2bpmn.process_table import OrderLabel, ProcessTable, TableRow

NODE_TAGS = ("startEvent", "endEvent", "task", "exclusiveGateway")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


@dataclass
class XmlStructure:
    counts: dict[str, int]
    nodes: dict[str, str]                      # id -> kind localname
    flows: dict[str, tuple[str, str, str]]     # id -> (source, target, label)
    lanes: dict[str, tuple[str, ...]]          # lane name -> node refs
    shape_ids: set[str]
    edge_ids: set[str]


def read_model_xml(xml_bytes: bytes) -> XmlStructure:
    root = ET.fromstring(xml_bytes)
    counts: dict[str, int] = {}
    for element in root.iter():
        name = _local(element.tag)
        counts[name] = counts.get(name, 0) + 1

    nodes: dict[str, str] = {}
    flows: dict[str, tuple[str, str, str]] = {}
    lanes: dict[str, tuple[str, ...]] = {}
    shape_ids: set[str] = set()
    edge_ids: set[str] = set()
    for element in root.iter():
        name = _local(element.tag)
        if name in NODE_TAGS:
            nodes[element.attrib["id"]] = name
        elif name == "sequenceFlow":
            label = ""
            for child in element:
                if _local(child.tag) == "conditionExpression":
                    label = child.text or ""
            flows[element.attrib["id"]] = (
                element.attrib["sourceRef"],
                element.attrib["targetRef"],
                label,
            )
        elif name == "lane":
            refs = tuple(
                child.text or "" for child in element if _local(child.tag) == "flowNodeRef"
            )
            lanes[element.attrib["name"]] = refs
        elif name == "BPMNShape":
            shape_ids.add(element.attrib["bpmnElement"])
        elif name == "BPMNEdge":
            edge_ids.add(element.attrib["bpmnElement"])
    return XmlStructure(counts, nodes, flows, lanes, shape_ids, edge_ids)


def structure_matches_model(structure: XmlStructure, model: BpmnModel) -> list[str]:
    """Mismatches between the emitted XML and the in-memory model (empty = isomorphic)."""
    problems = []
    expected_nodes = {n.id: n.kind.value for n in model.nodes}
    if structure.nodes != expected_nodes:
        problems.append(f"nodes differ: {structure.nodes} != {expected_nodes}")
    expected_flows = {f.id: (f.source, f.target, f.condition_label) for f in model.flows}
    if structure.flows != expected_flows:
        problems.append(f"flows differ: {structure.flows} != {expected_flows}")
    expected_lanes = {l.name: l.node_ids for l in model.lanes}
    if structure.lanes != expected_lanes:
        problems.append(f"lanes differ: {structure.lanes} != {expected_lanes}")
    for node in model.nodes:
        if node.id not in structure.shape_ids:
            problems.append(f"no BPMNShape for {node.id}")
    for flow in model.flows:
        if flow.id not in structure.edge_ids:
            problems.append(f"no BPMNEdge for {flow.id}")
    return problems


WHO_POOL = ("Affairs Department", "Production Manager", "Affairs Director",
            "Confidential Secretary", "Quality Office", "Review Board")
VERBS = ("Review", "Send", "Check", "Prepare", "File", "Archive", "Update")
OBJECTS = ("Request", "Report", "Budget", "Contract", "Summary", "Invoice")


def _activity(rng: random.Random) -> str:
    return f"{rng.choice(VERBS)} {rng.choice(OBJECTS)}"


def _condition(rng: random.Random, who: str) -> str:
    verb = rng.choice(("approves", "rejects", "accepts"))
    noun = rng.choice(("request", "budget", "report"))
    text = f"{who} {verb} {noun}"
    if rng.random() < 0.25:
        text = f"{text}, twice"      # exercises RFC-4180 quoting
    if rng.random() < 0.1:
        text = f'{text} "verbatim"'
    return text


def random_table(rng: random.Random) -> ProcessTable:
    """A structurally valid random table: plain rows, branch blocks, end markers."""
    rows = [TableRow(order=OrderLabel(0), activity="start")]
    seq = 0
    for _ in range(rng.randint(1, 6)):
        seq += 1
        if rng.random() < 0.45:
            # branch block with 2-3 branches, 1-3 steps each
            letters = "ab" if rng.random() < 0.7 else "abc"
            ended = 0
            for letter in letters:
                who = rng.choice(WHO_POOL)
                steps = rng.randint(1, 3)
                # keep at least one branch rejoining
                may_end = ended < len(letters) - 1 and rng.random() < 0.3
                if may_end:
                    ended += 1
                for step in range(1, steps + 1):
                    is_end_marker = may_end and step == steps
                    rows.append(
                        TableRow(
                            order=OrderLabel(seq, letter, step),
                            activity="end" if is_end_marker else _activity(rng),
                            condition=_condition(rng, who) if step == 1 else "",
                            who="" if is_end_marker else who,
                        )
                    )
        else:
            who = rng.choice(WHO_POOL) if rng.random() < 0.9 else ""
            rows.append(
                TableRow(
                    order=OrderLabel(seq),
                    activity=_activity(rng),
                    condition=_condition(rng, who or "Someone") if rng.random() < 0.15 else "",
                    who=who,
                )
            )
    rows.append(TableRow(order=OrderLabel(seq + 1), activity="", terminated="yes"))
    return ProcessTable(rows=tuple(rows))
