"""Participant, SVO-triple, condition and termination extraction.

Everything here operates on a substituted document (pronouns and aliases
already rewritten to canonical names, see :mod:`proc2bpmn.coreference`) and is
purely functional: the same document always extracts to the same values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .annotation import AnnotatedDocument, Token
from .coreference import (
    AliasMap,
    Mention,
    MentionKind,
    Span,
    collect_mentions,
    normalize_surface,
    _np_span,
)
from .errors import DanglingAlternative, NoParticipants
from .lexicon import KeywordType, Lexicon, VerbType

PARTICIPANT_LABELS = {"PERSON", "ORG", "ROLE", "SYSTEM"}

# Sentence-level patterns that signal process termination even when the verb
# classification route does not fire ("... closes the process").
TERMINATION_PATTERNS = (
    re.compile(
        r"\bthe\s+(?:process|workflow|procedure)\s+(?:\w+\s+)?"
        r"(?:ends|terminates|finishes|closes|is\s+(?:ended|terminated|finished|closed))\b"
    ),
    re.compile(r"\b(?:ends?|terminates?|finishes?|closes?)\s+the\s+(?:process|workflow|procedure)\b"),
)


@dataclass(frozen=True)
class Participant:
    canonical_name: str
    aliases: frozenset[str]
    kind: str
    first_mention: Span


class ParticipantRegistry:
    """Participants ordered by first mention, with alias-aware lookup."""

    def __init__(self, participants: list[Participant]):
        self._participants = tuple(participants)
        self._by_norm: dict[str, Participant] = {}
        for participant in self._participants:
            self._by_norm[normalize_surface(participant.canonical_name)] = participant
            for alias in participant.aliases:
                self._by_norm.setdefault(normalize_surface(alias), participant)

    def participants(self) -> tuple[Participant, ...]:
        return self._participants

    def find(self, surface: str) -> Participant | None:
        return self._by_norm.get(normalize_surface(surface))

    def __len__(self) -> int:
        return len(self._participants)

    def __iter__(self):
        return iter(self._participants)


@dataclass(frozen=True)
class SvoTriple:
    """One action: who does what to what, with classification and position."""

    subject: str | None          # canonical participant name; None = unknown
    verb_lemma: str
    verb_type: VerbType
    object_phrase: str
    sentence: int
    verb_index: int
    negated: bool = False


@dataclass
class ConditionAttachment:
    """A condition guarding a triple, optionally paired with its alternative."""

    condition_text: str
    governed_triple: SvoTriple
    polarity_sibling: SvoTriple | None = None


def extract_participants(
    doc: AnnotatedDocument, alias_map: AliasMap, lexicon: Lexicon
) -> ParticipantRegistry:
    """Build the registry: one participant per qualifying alias class.

    A class qualifies when one of its mentions occurs in subject or agent
    position (process-like nouns excluded) or carries a participant entity
    label. Order follows first mention; kind comes from the first entity
    label seen, ROLE otherwise.

    Raises:
        NoParticipants: nothing qualifies.
    """
    mentions = [m for m in collect_mentions(doc) if m.kind is not MentionKind.PRONOUN]
    by_class: dict[str, list[Mention]] = {}
    for mention in mentions:
        canonical = alias_map.canonical_of(mention.surface)
        if canonical is None:
            continue
        by_class.setdefault(canonical, []).append(mention)
    class_surfaces = {canonical: members for canonical, members in alias_map.classes()}

    participants = []
    for canonical, members in by_class.items():
        qualifies = False
        kind = "ROLE"
        for mention in sorted(members, key=lambda m: m.span):
            if mention.entity_label in PARTICIPANT_LABELS:
                qualifies = True
                kind = mention.entity_label
                break
        if not qualifies:
            qualifies = any(
                m.is_subject_role and not lexicon.is_process_noun(m.head_lemma) for m in members
            )
        if not qualifies:
            continue
        aliases = (
            class_surfaces.get(canonical, frozenset())
            | {m.surface for m in members}
            | {canonical}
        )
        participants.append(
            Participant(
                canonical_name=canonical,
                aliases=frozenset(aliases),
                kind=kind,
                first_mention=min(m.span for m in members),
            )
        )
    participants.sort(key=lambda p: p.first_mention)
    if not participants:
        raise NoParticipants("no identifiable actors in the narrative")
    return ParticipantRegistry(participants)


def _children(sentence: tuple[Token, ...], head: Token, deprels: set[str]) -> list[Token]:
    return [t for t in sentence if t.head == head.index and t.deprel in deprels]


def _np_surface(sentence: tuple[Token, ...], head: Token) -> str:
    start, end = _np_span(sentence, head)
    return " ".join(t.form for t in sentence[start - 1 : end - 1])


def _verb_chain(sentence: tuple[Token, ...]) -> list[Token]:
    """The root action verb plus verbs conjoined to it, in token order."""
    root = next((t for t in sentence if t.head == 0), None)
    if root is None or root.upos != "VERB" or root.lemma.lower() == "be":
        return []
    chain = [root]
    changed = True
    while changed:
        changed = False
        for token in sentence:
            if (
                token not in chain
                and token.deprel == "conj"
                and token.upos == "VERB"
                and any(token.head == v.index for v in chain)
            ):
                chain.append(token)
                changed = True
    chain.sort(key=lambda t: t.index)
    return chain


def _agent_phrase(sentence: tuple[Token, ...], verb: Token) -> Token | None:
    """Logical subject of a passive: a by-phrase object or a direct agent noun."""
    for token in _children(sentence, verb, {"agent"}):
        if token.upos in {"NOUN", "PROPN", "PRON"}:
            return token
        objects = _children(sentence, token, {"pobj"})
        if objects:
            return objects[0]
    return None


def extract_svo(
    doc: AnnotatedDocument, registry: ParticipantRegistry, lexicon: Lexicon
) -> list[SvoTriple]:
    """One triple per finite action verb: root verbs plus their conjuncts.

    Subjects come from the subject relation or from the agent phrase of a
    passive (whose passive subject becomes the object); objects from the
    direct object, attribute, or the object of the verb's preposition.
    Particles fold into the verb lemma; copulas and auxiliaries are skipped.
    Subjectless verbs inherit the previous triple's subject.
    """
    triples: list[SvoTriple] = []
    carry_subject: str | None = None
    for s_no, sentence in enumerate(doc.sentences, start=1):
        chain = _verb_chain(sentence)
        raw: list[dict] = []
        for verb in chain:
            particles = _children(sentence, verb, {"prt"})
            lemma = verb.lemma.lower()
            verb_lemma = lemma + "".join(f" {p.form.lower()}" for p in particles)
            negated = any(
                t.head == verb.index and (t.deprel == "neg" or t.lemma.lower() == "not")
                for t in sentence
            )

            subject_token = next(iter(_children(sentence, verb, {"nsubj"})), None)
            passive_token = next(iter(_children(sentence, verb, {"nsubjpass"})), None)
            if subject_token is None:
                subject_token = _agent_phrase(sentence, verb)

            object_token = next(iter(_children(sentence, verb, {"dobj"})), None)
            if object_token is None and passive_token is not None:
                object_token = passive_token
            if object_token is None:
                object_token = next(iter(_children(sentence, verb, {"attr"})), None)
            if object_token is None:
                for prep in _children(sentence, verb, {"prep"}):
                    pobjs = _children(sentence, prep, {"pobj"})
                    if pobjs:
                        object_token = pobjs[0]
                        break
            indirect = next(iter(_children(sentence, verb, {"dative", "iobj"})), None)

            raw.append(
                {
                    "verb": verb,
                    "verb_lemma": verb_lemma,
                    "base_lemma": lemma,
                    "subject_token": subject_token,
                    "object_token": object_token,
                    "indirect": indirect,
                    "negated": negated,
                }
            )

        # conjoined verbs share arguments they lack
        shared_subject = next((r["subject_token"] for r in raw if r["subject_token"] is not None), None)
        shared_object = next((r["object_token"] for r in raw if r["object_token"] is not None), None)
        for r in raw:
            if r["subject_token"] is None:
                r["subject_token"] = shared_subject
            if r["object_token"] is None:
                r["object_token"] = shared_object

        for r in raw:
            subject: str | None = None
            if r["subject_token"] is not None:
                surface = _np_surface(sentence, r["subject_token"])
                participant = registry.find(surface)
                if participant is not None:
                    subject = participant.canonical_name
            if subject is None:
                subject = carry_subject
            object_phrase = (
                _np_surface(sentence, r["object_token"]) if r["object_token"] is not None else ""
            )
            if r["indirect"] is not None:
                indirect_phrase = _np_surface(sentence, r["indirect"])
                object_phrase = f"{object_phrase} {indirect_phrase}".strip()
            triple = SvoTriple(
                subject=subject,
                verb_lemma=r["verb_lemma"],
                verb_type=lexicon.classify_verb(r["base_lemma"]),
                object_phrase=object_phrase,
                sentence=s_no,
                verb_index=r["verb"].index,
                negated=r["negated"],
            )
            triples.append(triple)
            carry_subject = subject
    return triples


def _subtree(sentence: tuple[Token, ...], head: Token) -> list[Token]:
    included = {head.index}
    changed = True
    while changed:
        changed = False
        for token in sentence:
            if token.index not in included and token.head in included:
                included.add(token.index)
                changed = True
    return [t for t in sentence if t.index in included]


def _condition_words(sentence: tuple[Token, ...], clause: list[Token], marker_indices: set[int]) -> list[Token]:
    return [
        t
        for t in clause
        if t.index not in marker_indices and t.deprel != "det" and t.upos != "PUNCT"
    ]


def _render_condition(tokens: list[Token]) -> str:
    words = []
    for token in tokens:
        if token.upos == "PROPN" or " " in token.form:
            words.append(token.form)
        else:
            words.append(token.form.lower())
    return " ".join(words)


def _inflect_like(lemma: str, model_form: str, model_lemma: str) -> str:
    form = model_form.lower()
    if form == model_lemma:
        return lemma
    if form == model_lemma + "s":
        return lemma + ("es" if lemma.endswith(("s", "sh", "ch", "x", "z", "o")) else "s")
    if form == model_lemma + "es":
        return lemma + "es"
    if model_lemma.endswith("y") and form == model_lemma[:-1] + "ies":
        return lemma[:-1] + "ies" if lemma.endswith("y") else lemma + "s"
    if form.endswith("ed"):
        return lemma + ("d" if lemma.endswith("e") else "ed")
    return lemma


def extract_conditions(
    doc: AnnotatedDocument, triples: Iterable[SvoTriple], lexicon: Lexicon
) -> list[ConditionAttachment]:
    """Attach conditional clauses to the triples they guard.

    An adverbial clause whose marker classifies as conditional guards its main
    clause's triple; an alternative keyword ("otherwise") makes the sentence's
    first triple the polarity sibling of the most recent conditional, with a
    condition synthesized by swapping the verb for its antonym (or prefixing
    "not" when no antonym is known).

    Raises:
        DanglingAlternative: an alternative keyword with no conditional in the
            same or previous sentence.
    """
    triple_list = list(triples)
    by_verb = {(t.sentence, t.verb_index): t for t in triple_list}
    attachments: list[ConditionAttachment] = []
    clause_info: dict[int, tuple[list[Token], Token]] = {}  # attachment idx -> (words, clause verb)

    for s_no, sentence in enumerate(doc.sentences, start=1):
        forms = [t.form for t in sentence]
        for token in sentence:
            if token.deprel != "advcl" or token.upos != "VERB":
                continue
            marks = _children(sentence, token, {"mark"})
            if not marks:
                continue
            mark = marks[0]
            kind, width = lexicon.keyword_at(forms, mark.index - 1)
            if kind is not KeywordType.CONDITIONAL:
                continue
            marker_indices = {mark.index + i for i in range(max(width, 1))}
            clause = _subtree(sentence, token)
            words = _condition_words(sentence, clause, marker_indices)
            governed = by_verb.get((s_no, token.head))
            if governed is None:
                governed = next((t for t in triple_list if t.sentence == s_no), None)
            if governed is None or not words:
                continue
            attachment = ConditionAttachment(
                condition_text=_render_condition(words),
                governed_triple=governed,
            )
            attachments.append(attachment)
            clause_info[len(attachments) - 1] = (words, token)

        alternative = next(
            (
                t
                for t in sentence
                if lexicon.classify_keyword(t.form) is KeywordType.ALTERNATIVE
                and t.upos != "PUNCT"
            ),
            None,
        )
        if alternative is None:
            continue
        guarded = next((t for t in triple_list if t.sentence == s_no), None)
        if guarded is None:
            continue
        recent = next(
            (
                i
                for i in range(len(attachments) - 1, -1, -1)
                if attachments[i].polarity_sibling is None
                and attachments[i].governed_triple.sentence in (s_no, s_no - 1)
                and i in clause_info
            ),
            None,
        )
        if recent is None:
            raise DanglingAlternative(
                f"sentence {s_no}: {alternative.form!r} with no preceding conditional"
            )
        words, clause_verb = clause_info[recent]
        synthesized = _synthesize_alternative(words, clause_verb, lexicon)
        sibling = ConditionAttachment(
            condition_text=synthesized,
            governed_triple=guarded,
            polarity_sibling=attachments[recent].governed_triple,
        )
        attachments[recent].polarity_sibling = guarded
        attachments.append(sibling)
    return attachments


def _synthesize_alternative(words: list[Token], clause_verb: Token, lexicon: Lexicon) -> str:
    antonym = lexicon.antonym_of(clause_verb.lemma)
    if antonym is None:
        return "not " + _render_condition(words)
    rendered = []
    for token in words:
        if token.index == clause_verb.index:
            rendered.append(_inflect_like(antonym, token.form, token.lemma.lower()))
        elif token.upos == "PROPN" or " " in token.form:
            rendered.append(token.form)
        else:
            rendered.append(token.form.lower())
    return " ".join(rendered)


def detect_termination(
    doc: AnnotatedDocument, triples: Iterable[SvoTriple], lexicon: Lexicon
) -> int | None:
    """Index of the first sentence that terminates the process, if any.

    Fires when a main verb classifies as a termination verb with a
    process-like subject or object, or when the sentence text matches one of
    the shipped termination patterns.
    """
    for s_no, sentence in enumerate(doc.sentences, start=1):
        for verb in _verb_chain(sentence):
            if lexicon.classify_verb(verb.lemma) is not VerbType.TERMINATION:
                continue
            arguments = _children(sentence, verb, {"nsubj", "nsubjpass", "dobj", "attr"})
            if any(lexicon.is_process_noun(t.lemma) for t in arguments):
                return s_no
        text = " ".join(t.form for t in sentence).lower()
        if any(pattern.search(text) for pattern in TERMINATION_PATTERNS):
            return s_no
    return None
