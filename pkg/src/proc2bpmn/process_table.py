"""The intermediate process table: ordered rows with hierarchical branch labels.

Rows carry Order/Activity/Condition/Who/Terminated. Branching is encoded in
the order label: ``3a1`` is sequence 3, branch a, step 1. The CSV form is
bit-exact: header ``Order,Activity,Condition,Who,Terminated``, RFC-4180
quoting, LF line endings, UTF-8 without BOM.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass

from .errors import BadOrderLabel, CsvSchemaError, EmptyProcess, TableInvariantError
from .extraction import ConditionAttachment, ParticipantRegistry, SvoTriple

CSV_HEADER = ("Order", "Activity", "Condition", "Who", "Terminated")
START_ACTIVITY = "start"
END_MARKER = "end"

_ORDER_RE = re.compile(r"^(\d+)(?:([a-z])(\d+))?$")


@dataclass(frozen=True)
class OrderLabel:
    seq: int
    branch: str | None = None
    step: int | None = None

    def __post_init__(self):
        if (self.branch is None) != (self.step is None):
            raise BadOrderLabel(f"branch and step must appear together: {self!r}")

    def sort_key(self) -> tuple[int, str, int]:
        return (self.seq, self.branch or "", self.step or 0)

    def __str__(self) -> str:
        if self.branch is None:
            return str(self.seq)
        return f"{self.seq}{self.branch}{self.step}"


def parse_order_label(text: str) -> OrderLabel:
    """Parse ``digits [letter digits]``; anything else is a BadOrderLabel."""
    match = _ORDER_RE.match(text)
    if not match:
        raise BadOrderLabel(f"bad order label {text!r}")
    seq, branch, step = match.groups()
    return OrderLabel(int(seq), branch, int(step) if step is not None else None)


@dataclass(frozen=True)
class TableRow:
    order: OrderLabel
    activity: str
    condition: str = ""
    who: str = ""
    terminated: str = ""


@dataclass(frozen=True)
class ProcessTable:
    rows: tuple[TableRow, ...]


def validate_table(table: ProcessTable) -> list[str]:
    """Check every table invariant; empty list means valid.

    An empty table is degenerate but valid; compiling it raises EmptyProcess
    downstream.
    """
    problems: list[str] = []
    rows = table.rows
    if not rows:
        return problems

    orders = [r.order for r in rows]
    if len(set(orders)) != len(orders):
        problems.append("duplicate order labels")
    if [o.sort_key() for o in orders] != sorted(o.sort_key() for o in orders):
        problems.append("rows are not sorted by order label")

    start_rows = [r for r in rows if r.activity == START_ACTIVITY]
    if len(start_rows) != 1:
        problems.append(f"expected exactly one 'start' row, found {len(start_rows)}")
    elif start_rows[0].order.branch is not None:
        problems.append("'start' row cannot sit inside a branch")

    terminated_rows = [r for r in rows if r.terminated]
    for row in terminated_rows:
        if row.terminated != "yes":
            problems.append(f"row {row.order}: terminated must be 'yes' or empty")
        elif row.activity:
            problems.append(f"row {row.order}: terminated row must have an empty activity")
    if sum(1 for r in rows if r.terminated == "yes") > 1:
        problems.append("more than one terminated row")

    branches: dict[int, dict[str, list[TableRow]]] = {}
    for row in rows:
        if row.order.branch is not None:
            branches.setdefault(row.order.seq, {}).setdefault(row.order.branch, []).append(row)
        elif row.activity == END_MARKER:
            problems.append(f"row {row.order}: 'end' marker is only valid inside a branch")

    for seq, by_letter in branches.items():
        if len(by_letter) < 2:
            problems.append(f"seq {seq}: a branched seq needs at least 2 branch letters")
        for letter, branch_rows in by_letter.items():
            steps = sorted(r.order.step for r in branch_rows)
            if steps != list(range(1, len(steps) + 1)):
                problems.append(f"branch {seq}{letter}: steps must be contiguous from 1")
            first = min(branch_rows, key=lambda r: r.order.step)
            if not first.condition:
                problems.append(f"branch {seq}{letter}: step-1 row needs a non-empty condition")
            enders = [r for r in branch_rows if r.activity == END_MARKER]
            if enders and max(r.order.step for r in enders) != max(steps):
                problems.append(f"branch {seq}{letter}: 'end' marker must be the last step")
    return problems


def _checked_table(rows: list[TableRow]) -> ProcessTable:
    table = ProcessTable(rows=tuple(rows))
    problems = validate_table(table)
    if problems:
        raise TableInvariantError("; ".join(problems))
    return table


def format_activity(triple: SvoTriple) -> str:
    """Render a triple as a Title-Cased activity label, determiners dropped."""
    words = triple.verb_lemma.split()
    for word in triple.object_phrase.split():
        if word.lower() in {"the", "a", "an"}:
            continue
        words.append(word)
    return " ".join(w[:1].upper() + w[1:] for w in words)


def build_table(
    triples: list[SvoTriple],
    conditions: list[ConditionAttachment],
    termination: int | None,
    registry: ParticipantRegistry,
) -> ProcessTable:
    """Assemble the process table from extraction results.

    Row 0 is the start row; unguarded triples take successive integer seqs; a
    conditional attachment and its polarity sibling share one seq with
    branches a and b (textual order first); a final terminated row is always
    appended, whether or not a termination sentence was detected.

    Raises:
        EmptyProcess: no activity triples to tabulate.
    """
    active = [t for t in triples if termination is None or t.sentence != termination]
    if not active:
        raise EmptyProcess("no activities extracted")

    attachment_of: dict[tuple[int, int], ConditionAttachment] = {}
    for attachment in conditions:
        key = (attachment.governed_triple.sentence, attachment.governed_triple.verb_index)
        attachment_of.setdefault(key, attachment)

    def key_of(t: SvoTriple) -> tuple[int, int]:
        return (t.sentence, t.verb_index)

    def segment_from(start_index: int) -> list[SvoTriple]:
        """The guarded triple plus following unattached triples of its sentence."""
        segment = [active[start_index]]
        sentence = active[start_index].sentence
        for t in active[start_index + 1 :]:
            if t.sentence != sentence or key_of(t) in attachment_of:
                break
            segment.append(t)
        return segment

    rows: list[TableRow] = [TableRow(order=OrderLabel(0), activity=START_ACTIVITY)]
    seq = 0
    consumed: set[tuple[int, int]] = set()
    index_of = {key_of(t): i for i, t in enumerate(active)}

    for i, triple in enumerate(active):
        if key_of(triple) in consumed:
            continue
        attachment = attachment_of.get(key_of(triple))
        if attachment is None:
            seq += 1
            rows.append(
                TableRow(
                    order=OrderLabel(seq),
                    activity=format_activity(triple),
                    who=triple.subject or "",
                )
            )
            consumed.add(key_of(triple))
            continue

        sibling_triple = attachment.polarity_sibling
        segments: list[tuple[str, list[SvoTriple]]] = [(attachment.condition_text, segment_from(i))]
        if sibling_triple is not None and key_of(sibling_triple) in index_of:
            sibling_attachment = attachment_of.get(key_of(sibling_triple))
            sibling_condition = (
                sibling_attachment.condition_text if sibling_attachment else ""
            )
            segments.append((sibling_condition, segment_from(index_of[key_of(sibling_triple)])))

        if len(segments) == 1:
            # lone conditional: an integer row carrying its condition, compiled
            # later into an optional-task gateway pattern
            seq += 1
            rows.append(
                TableRow(
                    order=OrderLabel(seq),
                    activity=format_activity(triple),
                    condition=attachment.condition_text,
                    who=triple.subject or "",
                )
            )
            consumed.add(key_of(triple))
            continue

        segments.sort(key=lambda s: key_of(s[1][0]))
        seq += 1
        for letter, (condition_text, segment) in zip("abcdefghijklmnopqrstuvwxyz", segments):
            for step, t in enumerate(segment, start=1):
                rows.append(
                    TableRow(
                        order=OrderLabel(seq, letter, step),
                        activity=format_activity(t),
                        condition=condition_text if step == 1 else "",
                        who=t.subject or "",
                    )
                )
                consumed.add(key_of(t))

    rows.append(TableRow(order=OrderLabel(seq + 1), activity="", terminated="yes"))
    return _checked_table(rows)


def serialize_csv(table: ProcessTable) -> bytes:
    """Bit-exact CSV: fixed header, RFC-4180 quoting, LF endings, UTF-8."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(CSV_HEADER)
    for row in table.rows:
        writer.writerow([str(row.order), row.activity, row.condition, row.who, row.terminated])
    return buffer.getvalue().encode("utf-8")


def parse_csv(data: bytes | str) -> ProcessTable:
    """Parse CSV back into a validated table.

    Raises:
        CsvSchemaError: wrong header, column count, BOM, or non-UTF-8 bytes.
        BadOrderLabel: an unparseable order cell.
        TableInvariantError: rows break a table invariant.
    """
    if isinstance(data, bytes):
        if data.startswith(b"\xef\xbb\xbf"):
            raise CsvSchemaError("unexpected UTF-8 BOM")
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CsvSchemaError(f"input is not UTF-8: {exc}") from exc
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvSchemaError("empty input, expected a header row") from None
    if tuple(header) != CSV_HEADER:
        raise CsvSchemaError(f"wrong header {header!r}, expected {','.join(CSV_HEADER)}")
    rows = []
    for line_no, cells in enumerate(reader, start=2):
        if not cells:
            continue
        if len(cells) != 5:
            raise CsvSchemaError(f"row {line_no}: expected 5 columns, found {len(cells)}")
        order = parse_order_label(cells[0])
        rows.append(
            TableRow(
                order=order,
                activity=cells[1],
                condition=cells[2],
                who=cells[3],
                terminated=cells[4],
            )
        )
    return _checked_table(rows)
