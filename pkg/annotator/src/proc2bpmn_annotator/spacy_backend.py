"""Optional spaCy backend: a pretrained pipeline behind the same contract.

Dependency labels are mapped onto the compiler's documented inventory at this
boundary, so no toolkit dialect leaks downstream. Coreference chains are
emitted only when the loaded pipeline actually has a coreference component;
they are never faked.
"""

from __future__ import annotations


class ToolkitUnavailable(Exception):
    """The backend cannot run; the message names the missing piece."""


DEPREL_MAP = {
    "ROOT": "root",
    "obj": "dobj",
    "nsubj:pass": "nsubjpass",
    "obl:agent": "agent",
    "compound:prt": "prt",
}

ENTITY_LABELS = {"PERSON", "ORG", "ROLE"}


def annotate(text: str, model: str, source_id: str = "") -> dict:
    try:
        import spacy  # type: ignore[import-not-found]
    except ImportError as exc:
        raise ToolkitUnavailable(
            f"cannot load spaCy model {model!r}: spacy is not installed"
        ) from exc
    try:
        nlp = spacy.load(model)
    except OSError as exc:
        raise ToolkitUnavailable(f"cannot load spaCy model {model!r}: {exc}") from exc

    parsed = nlp(text)
    sentences = []
    offsets = []  # sentence number and first-token index per spaCy token
    for s_no, sent in enumerate(parsed.sents, start=1):
        tokens = []
        for i, token in enumerate(sent, start=1):
            offsets.append((s_no, token.i - sent.start + 1))
            head = 0 if token.head is token else token.head.i - sent.start + 1
            deprel = DEPREL_MAP.get(token.dep_, token.dep_.lower())
            tokens.append(
                {
                    "index": i,
                    "form": token.text,
                    "lemma": token.lemma_,
                    "upos": token.pos_,
                    "head": head,
                    "deprel": deprel,
                }
            )
        sentences.append(tokens)

    sent_spans = list(parsed.sents)

    def locate(start_char_token) -> tuple[int, int] | None:
        for s_no, sent in enumerate(sent_spans, start=1):
            if sent.start <= start_char_token.i < sent.end:
                return s_no, start_char_token.i - sent.start + 1
        return None

    entities = []
    for ent in parsed.ents:
        located = locate(ent[0])
        if located is None or ent.label_ not in ENTITY_LABELS:
            continue
        s_no, start = located
        entities.append(
            {"sentence": s_no, "start": start, "end": start + len(ent), "label": ent.label_}
        )

    chains = []
    spangroups = getattr(parsed.spans, "data", None)
    if spangroups:
        for key, group in parsed.spans.items():
            if not key.startswith("coref"):
                continue
            mentions = []
            for span in group:
                located = locate(span[0])
                if located is not None:
                    s_no, start = located
                    mentions.append(
                        {"sentence": s_no, "start": start, "end": start + len(span)}
                    )
            if len(mentions) >= 2:
                chains.append({"mentions": mentions})

    return {
        "source_id": source_id,
        "sentences": sentences,
        "entities": entities,
        "chains": chains,
    }


def model_versions(model: str) -> dict:
    try:
        import spacy  # type: ignore[import-not-found]
    except ImportError:
        return {"spacy": None, "model": model, "available": False}
    meta = {"spacy": spacy.__version__, "model": model, "available": True}
    try:
        meta["model_version"] = spacy.load(model).meta.get("version")
    except OSError:
        meta["available"] = False
    return meta
