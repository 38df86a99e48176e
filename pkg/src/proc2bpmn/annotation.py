"""Linguistic data model and ingestion of the annotation interchange formats.

Two input formats are accepted and standardized into the same
:class:`AnnotatedDocument` value:

* annotation interchange JSON (the schema documented in the README), and
* a CoNLL-U subset (tab separated, 10 columns, blank-line sentence breaks,
  ``#`` comment lines skipped; columns beyond index/form/lemma/upos/head/deprel
  are ignored).

Token and sentence indices are 1-based; ``head == 0`` marks the root.
All values are immutable and safe to share between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import MalformedInput, SchemaViolation

JSON_TOKEN_FIELDS = ("index", "form", "lemma", "upos", "head", "deprel")


@dataclass(frozen=True)
class Token:
    """One token of a dependency-parsed sentence."""

    index: int
    form: str
    lemma: str
    upos: str
    head: int
    deprel: str


@dataclass(frozen=True)
class EntitySpan:
    """A labeled entity over a half-open token range of one sentence."""

    sentence: int
    start: int
    end: int
    label: str


@dataclass(frozen=True)
class CorefChain:
    """Pre-computed coreference chain: ordered (sentence, start, end) spans."""

    mentions: tuple[tuple[int, int, int], ...]


@dataclass(frozen=True)
class AnnotatedDocument:
    sentences: tuple[tuple[Token, ...], ...]
    entities: tuple[EntitySpan, ...] = ()
    chains: tuple[CorefChain, ...] = ()
    source_id: str = ""

    def sentence(self, index: int) -> tuple[Token, ...]:
        """Return the 1-based sentence ``index``."""
        return self.sentences[index - 1]


@dataclass(frozen=True)
class Violation:
    """A broken invariant, located as precisely as the data allows."""

    location: str
    reason: str

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"{self.location}: {self.reason}"


def validate_document(doc: AnnotatedDocument) -> list[Violation]:
    """Check every document invariant; an empty list means the document is valid.

    Violations are data, not failures: callers decide whether to raise.
    """
    violations: list[Violation] = []
    if not doc.sentences:
        violations.append(Violation("document", "sentence list is empty"))

    for s_no, sentence in enumerate(doc.sentences, start=1):
        n = len(sentence)
        roots = 0
        for pos, token in enumerate(sentence, start=1):
            loc = f"sentence {s_no}, token {pos}"
            if token.index != pos:
                violations.append(
                    Violation(loc, f"token index {token.index} does not match position {pos}")
                )
            if not token.form:
                violations.append(Violation(loc, "empty form"))
            if not token.deprel:
                violations.append(Violation(loc, "empty deprel"))
            if token.head < 0:
                violations.append(Violation(loc, f"negative head {token.head}"))
            elif token.head == token.index:
                violations.append(Violation(loc, "token is its own head"))
            elif token.head > n:
                violations.append(
                    Violation(loc, f"head {token.head} outside sentence of length {n}")
                )
            if token.head == 0:
                roots += 1
        if roots != 1:
            violations.append(
                Violation(f"sentence {s_no}", f"expected exactly one root token, found {roots}")
            )

    for span in doc.entities:
        loc = f"entity {span.label!r} at sentence {span.sentence}, tokens {span.start}..{span.end}"
        problem = _span_problem(doc, span.sentence, span.start, span.end)
        if problem:
            violations.append(Violation(loc, problem))
        if not span.label:
            violations.append(Violation(loc, "empty label"))

    for c_no, chain in enumerate(doc.chains, start=1):
        loc = f"chain {c_no}"
        if len(chain.mentions) < 2:
            violations.append(Violation(loc, "chain has fewer than 2 mentions"))
        seen: set[tuple[int, int, int]] = set()
        for mention in chain.mentions:
            if mention in seen:
                violations.append(Violation(loc, f"duplicate mention span {mention}"))
            seen.add(mention)
            problem = _span_problem(doc, *mention)
            if problem:
                violations.append(Violation(f"{loc}, mention {mention}", problem))

    return violations


def _span_problem(doc: AnnotatedDocument, sentence: int, start: int, end: int) -> str | None:
    if not 1 <= sentence <= len(doc.sentences):
        return f"sentence index {sentence} out of range"
    n = len(doc.sentences[sentence - 1])
    if not (1 <= start < end <= n + 1):
        return f"span {start}..{end} invalid in sentence of length {n}"
    return None


def _checked(doc: AnnotatedDocument) -> AnnotatedDocument:
    violations = validate_document(doc)
    if violations:
        raise SchemaViolation("; ".join(str(v) for v in violations))
    return doc


def parse_annotation_json(data: bytes | str) -> AnnotatedDocument:
    """Parse annotation interchange JSON into a validated document.

    Raises:
        MalformedInput: input is not UTF-8 JSON or the top level is not an object.
        SchemaViolation: a field is missing or an invariant is broken; the
            message names the offending sentence/token.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"input is not UTF-8: {exc}") from exc
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"input is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedInput("top-level JSON value must be an object")
    if "sentences" not in raw:
        raise SchemaViolation("document: missing 'sentences' field")
    if not isinstance(raw["sentences"], list):
        raise SchemaViolation("document: 'sentences' must be a list")

    sentences = []
    for s_no, raw_sentence in enumerate(raw["sentences"], start=1):
        if not isinstance(raw_sentence, list):
            raise SchemaViolation(f"sentence {s_no}: must be a list of tokens")
        tokens = []
        for t_no, raw_token in enumerate(raw_sentence, start=1):
            loc = f"sentence {s_no}, token {t_no}"
            if not isinstance(raw_token, dict):
                raise SchemaViolation(f"{loc}: must be an object")
            for name in JSON_TOKEN_FIELDS:
                if name not in raw_token:
                    raise SchemaViolation(f"{loc}: missing field {name!r}")
            try:
                token = Token(
                    index=int(raw_token["index"]),
                    form=str(raw_token["form"]),
                    lemma=str(raw_token["lemma"]),
                    upos=str(raw_token["upos"]),
                    head=int(raw_token["head"]),
                    deprel=str(raw_token["deprel"]),
                )
            except (TypeError, ValueError) as exc:
                raise SchemaViolation(f"{loc}: {exc}") from exc
            tokens.append(token)
        sentences.append(tuple(tokens))

    entities = []
    for e_no, raw_span in enumerate(raw.get("entities", []), start=1):
        try:
            entities.append(
                EntitySpan(
                    sentence=int(raw_span["sentence"]),
                    start=int(raw_span["start"]),
                    end=int(raw_span["end"]),
                    label=str(raw_span["label"]),
                )
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise SchemaViolation(f"entity {e_no}: {exc!r}") from exc

    chains = []
    for c_no, raw_chain in enumerate(raw.get("chains", []), start=1):
        try:
            mentions = tuple(
                (int(m["sentence"]), int(m["start"]), int(m["end"]))
                for m in raw_chain["mentions"]
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise SchemaViolation(f"chain {c_no}: {exc!r}") from exc
        chains.append(CorefChain(mentions=mentions))

    doc = AnnotatedDocument(
        sentences=tuple(sentences),
        entities=tuple(entities),
        chains=tuple(chains),
        source_id=str(raw.get("source_id", "")),
    )
    return _checked(doc)


def serialize_annotation_json(doc: AnnotatedDocument) -> bytes:
    """Serialize a document to canonical interchange JSON (UTF-8, 2-space indent)."""
    payload = {
        "source_id": doc.source_id,
        "sentences": [
            [
                {
                    "index": t.index,
                    "form": t.form,
                    "lemma": t.lemma,
                    "upos": t.upos,
                    "head": t.head,
                    "deprel": t.deprel,
                }
                for t in sentence
            ]
            for sentence in doc.sentences
        ],
        "entities": [
            {"sentence": e.sentence, "start": e.start, "end": e.end, "label": e.label}
            for e in doc.entities
        ],
        "chains": [
            {"mentions": [{"sentence": s, "start": a, "end": b} for s, a, b in c.mentions]}
            for c in doc.chains
        ],
    }
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def parse_conllu(data: bytes | str) -> AnnotatedDocument:
    """Parse the CoNLL-U subset; entities and chains come back empty.

    Multiword-token ranges (``1-2``) and empty nodes (``1.1``) are skipped.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"input is not UTF-8: {exc}") from exc

    sentences: list[tuple[Token, ...]] = []
    current: list[Token] = []
    for line_no, line in enumerate(data.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            if current:
                sentences.append(tuple(current))
                current = []
            continue
        if stripped.startswith("#"):
            continue
        columns = line.split("\t")
        if len(columns) != 10:
            raise MalformedInput(
                f"line {line_no}: expected 10 tab-separated columns, found {len(columns)}"
            )
        token_id = columns[0]
        if "-" in token_id or "." in token_id:
            continue
        try:
            index = int(token_id)
        except ValueError as exc:
            raise MalformedInput(f"line {line_no}: non-numeric token id {token_id!r}") from exc
        try:
            head = int(columns[6])
        except ValueError as exc:
            raise MalformedInput(f"line {line_no}: non-numeric head {columns[6]!r}") from exc
        current.append(
            Token(
                index=index,
                form=columns[1],
                lemma=columns[2],
                upos=columns[3],
                head=head,
                deprel=columns[7],
            )
        )
    if current:
        sentences.append(tuple(current))
    if not sentences:
        raise MalformedInput("no tokens found in CoNLL-U input")
    return _checked(AnnotatedDocument(sentences=tuple(sentences)))


def serialize_conllu(doc: AnnotatedDocument) -> bytes:
    """Serialize token content back to the CoNLL-U subset (entities are dropped)."""
    blocks = []
    for sentence in doc.sentences:
        lines = [
            f"{t.index}\t{t.form}\t{t.lemma}\t{t.upos}\t_\t_\t{t.head}\t{t.deprel}\t_\t_"
            for t in sentence
        ]
        blocks.append("\n".join(lines))
    return ("\n\n".join(blocks) + "\n").encode("utf-8")
