"""Anaphora resolution and alias detection.

The resolver is rule based, in the salience-scoring tradition: candidate
antecedents are the non-pronoun mentions of the current and two preceding
sentences, scored by grammatical role and recency, filtered by number and
animacy agreement where those are determinable. Pre-computed chains on the
document, when present, take precedence; the rules only cover pronouns
outside all chains. First/second-person pronouns are never resolved.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple

from .annotation import AnnotatedDocument, Token
from .errors import StaleResolution
from .lexicon import Lexicon

DETERMINERS = {"the", "a", "an"}

THIRD_PERSON_PRONOUNS = {
    "he", "him", "his", "she", "her", "hers", "it", "its", "they", "them", "their",
    "himself", "herself", "itself", "themselves",
}
HUMAN_PRONOUNS = {"he", "him", "his", "she", "her", "hers", "himself", "herself"}
NONHUMAN_PRONOUNS = {"it", "its", "itself"}
PLURAL_PRONOUNS = {"they", "them", "their", "themselves"}
REFLEXIVE_PRONOUNS = {"himself", "herself", "itself", "themselves"}

# Positions a pronoun must occupy to be resolved, and the roles that feed the
# salience score.
SUBJECT_DEPRELS = {"nsubj"}
OBJECT_DEPRELS = {"dobj", "nsubjpass", "attr", "pobj"}
NP_MODIFIER_DEPRELS = {"det", "amod", "compound", "nn", "poss", "nmod", "nmod:poss", "nummod"}

CANDIDATE_WINDOW = 2          # preceding sentences searched for antecedents
SUBJECT_SCORE = 3
OBJECT_SCORE = 2


class Span(NamedTuple):
    sentence: int
    start: int
    end: int


class MentionKind(enum.Enum):
    PRONOUN = "pronoun"
    NOMINAL = "nominal"
    PROPER = "proper"


@dataclass(frozen=True)
class Mention:
    """A candidate referring expression: an NP span with its head token."""

    span: Span
    surface: str
    head_lemma: str
    kind: MentionKind
    head_index: int
    deprel: str
    entity_label: str | None = None

    @property
    def is_subject_role(self) -> bool:
        return self.deprel in SUBJECT_DEPRELS or self.deprel == "agent"

    @property
    def is_object_role(self) -> bool:
        return self.deprel in OBJECT_DEPRELS


@dataclass(frozen=True)
class Resolution:
    pronoun: Mention
    antecedent: Mention
    rule: str


@dataclass(frozen=True)
class CorefResult:
    document: AnnotatedDocument
    resolutions: tuple[Resolution, ...]
    unresolved: tuple[Mention, ...]


def normalize_surface(surface: str) -> str:
    """Casefold, strip leading determiners and trailing punctuation."""
    words = surface.strip().strip(".,;:!?").casefold().split()
    while words and words[0] in DETERMINERS:
        words = words[1:]
    return " ".join(words)


def _np_span(sentence: tuple[Token, ...], head: Token) -> tuple[int, int]:
    """Expand a noun head to its left modifiers (determiner, adjectives, compounds)."""
    included = {head.index}
    changed = True
    while changed:
        changed = False
        for token in sentence:
            if (
                token.index not in included
                and token.head in included
                and token.index < head.index
                and token.deprel in NP_MODIFIER_DEPRELS
            ):
                included.add(token.index)
                changed = True
    return min(included), head.index + 1


def _logical_deprel(sentence: tuple[Token, ...], token: Token) -> str:
    """A pobj under an 'agent' preposition counts as the agent itself."""
    if token.deprel == "pobj" and 1 <= token.head <= len(sentence):
        if sentence[token.head - 1].deprel == "agent":
            return "agent"
    return token.deprel


def collect_mentions(doc: AnnotatedDocument) -> list[Mention]:
    """All mentions of a document in order: entity spans, argument NPs, pronouns."""
    label_by_head: dict[tuple[int, int], str] = {}
    span_by_head: dict[tuple[int, int], Span] = {}
    for entity in doc.entities:
        sentence = doc.sentence(entity.sentence)
        head = _span_head(sentence, entity.start, entity.end)
        key = (entity.sentence, head.index)
        label_by_head[key] = entity.label
        span_by_head[key] = Span(entity.sentence, entity.start, entity.end)

    mentions: dict[Span, Mention] = {}
    for s_no, sentence in enumerate(doc.sentences, start=1):
        for token in sentence:
            if token.upos == "PRON":
                span = Span(s_no, token.index, token.index + 1)
                mentions[span] = Mention(
                    span=span,
                    surface=token.form,
                    head_lemma=token.lemma.lower(),
                    kind=MentionKind.PRONOUN,
                    head_index=token.index,
                    deprel=_logical_deprel(sentence, token),
                )
                continue
            if token.upos not in {"NOUN", "PROPN"}:
                continue
            deprel = _logical_deprel(sentence, token)
            key = (s_no, token.index)
            if deprel not in SUBJECT_DEPRELS | OBJECT_DEPRELS | {"agent"} and key not in label_by_head:
                continue
            start, end = _np_span(sentence, token)
            span = Span(s_no, start, end)
            surface = " ".join(t.form for t in sentence[start - 1 : end - 1])
            kind = (
                MentionKind.PROPER
                if any(t.upos == "PROPN" for t in sentence[start - 1 : end - 1])
                else MentionKind.NOMINAL
            )
            mentions[span] = Mention(
                span=span,
                surface=surface,
                head_lemma=token.lemma.lower(),
                kind=kind,
                head_index=token.index,
                deprel=deprel,
                entity_label=label_by_head.get(key),
            )
    # entity spans whose head produced no argument mention (e.g. inside a
    # prepositional phrase the rules do not track) still count as mentions
    for key, span in span_by_head.items():
        if not any(m.span.sentence == span.sentence and m.head_index == key[1] for m in mentions.values()):
            sentence = doc.sentence(span.sentence)
            head = _span_head(sentence, span.start, span.end)
            surface = " ".join(t.form for t in sentence[span.start - 1 : span.end - 1])
            kind = (
                MentionKind.PROPER
                if any(t.upos == "PROPN" for t in sentence[span.start - 1 : span.end - 1])
                else MentionKind.NOMINAL
            )
            mentions[span] = Mention(
                span=span,
                surface=surface,
                head_lemma=head.lemma.lower(),
                kind=kind,
                head_index=head.index,
                deprel=_logical_deprel(sentence, head),
                entity_label=label_by_head[key],
            )
    return sorted(mentions.values(), key=lambda m: (m.span.sentence, m.span.start, -m.span.end))


def _span_head(sentence: tuple[Token, ...], start: int, end: int) -> Token:
    """The token inside [start, end) whose head lies outside the span."""
    inside = {t.index for t in sentence[start - 1 : end - 1]}
    for token in sentence[start - 1 : end - 1]:
        if token.head not in inside:
            return token
    return sentence[end - 2]


def participant_candidates(doc: AnnotatedDocument) -> list[Mention]:
    """Non-pronoun mentions that can name a participant.

    A mention qualifies by occurring in subject/agent position or by carrying
    an entity label; plain object NPs are not participant candidates.
    """
    return [
        m
        for m in collect_mentions(doc)
        if m.kind is not MentionKind.PRONOUN
        and (m.is_subject_role or m.entity_label is not None)
    ]


def _is_plural(mention: Mention) -> bool:
    last = mention.surface.split()[-1].lower() if mention.surface else ""
    lemma = mention.head_lemma
    return last != lemma and last in {lemma + "s", lemma + "es"}


def _agreement_ok(pronoun_form: str, candidate: Mention) -> bool:
    form = pronoun_form.lower()
    if form in PLURAL_PRONOUNS:
        return _is_plural(candidate) or candidate.entity_label == "ORG"
    if _is_plural(candidate):
        return False
    if form in HUMAN_PRONOUNS and candidate.entity_label == "ORG":
        return False
    if form in NONHUMAN_PRONOUNS and candidate.entity_label in {"PERSON", "ROLE"}:
        return False
    return True


def _clause_subject_index(sentence: tuple[Token, ...], pronoun: Token) -> int | None:
    """Token index of the subject of the pronoun's governing verb, if any."""
    for token in sentence:
        if token.head == pronoun.head and token.deprel in SUBJECT_DEPRELS:
            return token.index
    return None


def resolve_anaphora(
    doc: AnnotatedDocument,
    registry_hint: Iterable[str] | None = None,
) -> CorefResult:
    """Resolve third-person pronouns in argument positions to antecedents.

    Returns the substituted document together with the resolutions made and
    the pronouns that could not be resolved. When ``registry_hint`` is given
    and some candidates match a hinted surface, only those are considered.
    """
    mentions = collect_mentions(doc)
    non_pronoun = [m for m in mentions if m.kind is not MentionKind.PRONOUN]
    chain_of_span: dict[Span, int] = {}
    for c_no, chain in enumerate(doc.chains):
        for raw in chain.mentions:
            chain_of_span[Span(*raw)] = c_no

    hints = {normalize_surface(h) for h in registry_hint} if registry_hint else None

    resolutions: list[Resolution] = []
    unresolved: list[Mention] = []
    for pronoun in mentions:
        if pronoun.kind is not MentionKind.PRONOUN:
            continue
        resolvable_position = (
            pronoun.deprel in SUBJECT_DEPRELS
            or pronoun.deprel in {"dobj", "nsubjpass", "agent"}
        )
        if not resolvable_position:
            continue
        if pronoun.surface.lower() not in THIRD_PERSON_PRONOUNS:
            unresolved.append(pronoun)
            continue

        chain_no = chain_of_span.get(pronoun.span)
        if chain_no is not None:
            antecedent = _chain_antecedent(doc, mentions, chain_no, pronoun)
            if antecedent is not None:
                resolutions.append(Resolution(pronoun, antecedent, "input-chain"))
            else:
                unresolved.append(pronoun)
            continue

        candidates = [
            m
            for m in non_pronoun
            if pronoun.span.sentence - CANDIDATE_WINDOW <= m.span.sentence <= pronoun.span.sentence
            and (m.span.sentence, m.span.start) < (pronoun.span.sentence, pronoun.span.start)
            and _agreement_ok(pronoun.surface, m)
        ]
        if pronoun.surface.lower() not in REFLEXIVE_PRONOUNS:
            # a non-reflexive object pronoun cannot corefer with the subject
            # of its own verb
            sentence = doc.sentence(pronoun.span.sentence)
            p_token = sentence[pronoun.head_index - 1]
            if pronoun.deprel in {"dobj", "pobj", "agent", "nsubjpass"}:
                subject_index = _clause_subject_index(sentence, p_token)
                if subject_index is not None:
                    candidates = [
                        m
                        for m in candidates
                        if not (m.span.sentence == pronoun.span.sentence and m.head_index == subject_index)
                    ]
        if hints is not None:
            hinted = [m for m in candidates if normalize_surface(m.surface) in hints]
            if hinted:
                candidates = hinted
        if not candidates:
            unresolved.append(pronoun)
            continue

        def score(m: Mention) -> int:
            role = SUBJECT_SCORE if m.is_subject_role else OBJECT_SCORE if m.is_object_role else 0
            return role + 1 - (pronoun.span.sentence - m.span.sentence)

        best = max(candidates, key=lambda m: (score(m), m.span.sentence, m.span.start))
        rule = "nearest-subject" if best.is_subject_role else "salience"
        resolutions.append(Resolution(pronoun, best, rule))

    substituted = _apply_resolutions(doc, resolutions)
    return CorefResult(substituted, tuple(resolutions), tuple(unresolved))


def _chain_antecedent(
    doc: AnnotatedDocument,
    mentions: list[Mention],
    chain_no: int,
    pronoun: Mention,
) -> Mention | None:
    by_span = {m.span: m for m in mentions}
    for raw in doc.chains[chain_no].mentions:
        span = Span(*raw)
        if (span.sentence, span.start) >= (pronoun.span.sentence, pronoun.span.start):
            continue
        mention = by_span.get(span)
        if mention is not None and mention.kind is not MentionKind.PRONOUN:
            return mention
        if mention is None:
            sentence = doc.sentence(span.sentence)
            head = _span_head(sentence, span.start, span.end)
            if head.upos != "PRON":
                surface = " ".join(t.form for t in sentence[span.start - 1 : span.end - 1])
                kind = (
                    MentionKind.PROPER
                    if any(t.upos == "PROPN" for t in sentence[span.start - 1 : span.end - 1])
                    else MentionKind.NOMINAL
                )
                return Mention(
                    span=span,
                    surface=surface,
                    head_lemma=head.lemma.lower(),
                    kind=kind,
                    head_index=head.index,
                    deprel=head.deprel,
                )
    return None


class AliasMap:
    """A partition of mention surfaces into classes with one canonical name."""

    def __init__(self, classes: list[tuple[str, frozenset[str]]]):
        self._classes = tuple(sorted(classes))
        self._canonical_by_norm: dict[str, str] = {}
        for canonical, members in self._classes:
            self._canonical_by_norm[normalize_surface(canonical)] = canonical
            for member in members:
                self._canonical_by_norm[normalize_surface(member)] = canonical

    def canonical_of(self, surface: str) -> str | None:
        return self._canonical_by_norm.get(normalize_surface(surface))

    def classes(self) -> tuple[tuple[str, frozenset[str]], ...]:
        return self._classes

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AliasMap) and self._classes == other._classes

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"AliasMap({list(self._classes)!r})"


def _title_case(norm: str) -> str:
    return " ".join(w[:1].upper() + w[1:] for w in norm.split())


def detect_aliases(mentions: Iterable[Mention], lexicon: Lexicon) -> AliasMap:
    """Partition participant-candidate mentions into alias classes.

    Two surfaces merge when, after normalization, they are equal; or one's
    token sequence is a suffix of the other's with matching head lemmas; or
    the head lemmas are equal-or-synonyms and the modifier token sets do not
    conflict. Merging is the transitive closure of those pairwise merges and
    is independent of input order.
    """
    head_by_norm: dict[str, str] = {}
    surfaces_by_norm: dict[str, set[str]] = {}
    for mention in mentions:
        if mention.kind is MentionKind.PRONOUN:
            continue
        norm = normalize_surface(mention.surface)
        if not norm:
            continue
        head_by_norm.setdefault(norm, mention.head_lemma.lower())
        surfaces_by_norm.setdefault(norm, set()).add(mention.surface)

    norms = sorted(surfaces_by_norm)
    parent = {n: n for n in norms}

    def find(n: str) -> str:
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for i, left in enumerate(norms):
        for right in norms[i + 1 :]:
            if _should_merge(left, right, head_by_norm, lexicon):
                union(left, right)

    groups: dict[str, list[str]] = {}
    for norm in norms:
        groups.setdefault(find(norm), []).append(norm)

    classes = []
    for members in groups.values():
        canonical_norm = max(members, key=lambda n: (len(n.split()), len(n), n))
        surfaces = frozenset(s for n in members for s in surfaces_by_norm[n])
        classes.append((_title_case(canonical_norm), surfaces))
    return AliasMap(classes)


def _should_merge(a: str, b: str, head_by_norm: dict[str, str], lexicon: Lexicon) -> bool:
    tokens_a, tokens_b = a.split(), b.split()
    head_a, head_b = head_by_norm[a], head_by_norm[b]
    if a == b:
        return True
    shorter, longer = sorted((tokens_a, tokens_b), key=len)
    if shorter and longer[len(longer) - len(shorter) :] == shorter and head_a == head_b:
        return True
    heads_related = head_a == head_b or head_b in lexicon.synonyms_of(head_a)
    if heads_related:
        mods_a = set(tokens_a) - {tokens_a[-1]}
        mods_b = set(tokens_b) - {tokens_b[-1]}
        if mods_a <= mods_b or mods_b <= mods_a:
            return True
    return False


def apply_substitutions(
    doc: AnnotatedDocument,
    resolutions: Iterable[Resolution],
    alias_map: AliasMap,
) -> AnnotatedDocument:
    """Rewrite resolved pronouns and alias surfaces to canonical names.

    Pronoun tokens take the antecedent's surface verbatim; alias mention
    tokens are aligned right-to-left against the canonical name's words.
    Applying the same substitutions twice is a no-op the second time.

    Raises:
        StaleResolution: a resolution's span no longer matches the document.
    """
    rewrites: dict[tuple[int, int], tuple[str, str]] = {}
    for resolution in resolutions:
        span = resolution.pronoun.span
        token = doc.sentence(span.sentence)[span.start - 1]
        target = resolution.antecedent.surface
        if token.form not in (resolution.pronoun.surface, target):
            raise StaleResolution(
                f"sentence {span.sentence}, token {span.start}: expected "
                f"{resolution.pronoun.surface!r}, found {token.form!r}"
            )
        rewrites[(span.sentence, span.start)] = (target, target.lower())

    for mention in collect_mentions(doc):
        if mention.kind is MentionKind.PRONOUN:
            continue
        canonical = alias_map.canonical_of(mention.surface)
        if canonical is None:
            continue
        sentence = doc.sentence(mention.span.sentence)
        span_tokens = [
            t for t in sentence[mention.span.start - 1 : mention.span.end - 1] if t.deprel != "det"
        ]
        words = canonical.split()
        if not span_tokens or len(words) < len(span_tokens):
            continue
        offset = len(words) - len(span_tokens)
        for i, token in enumerate(span_tokens):
            if i == 0:
                new_form = " ".join(words[: offset + 1])
            else:
                new_form = words[offset + i]
            if new_form != token.form:
                rewrites[(mention.span.sentence, token.index)] = (new_form, new_form.lower())

    if not rewrites:
        return doc

    new_sentences = []
    for s_no, sentence in enumerate(doc.sentences, start=1):
        new_tokens = []
        for token in sentence:
            rewrite = rewrites.get((s_no, token.index))
            if rewrite is not None:
                token = replace(token, form=rewrite[0], lemma=rewrite[1])
            new_tokens.append(token)
        new_sentences.append(tuple(new_tokens))
    return replace(doc, sentences=tuple(new_sentences))


def _apply_resolutions(doc: AnnotatedDocument, resolutions: list[Resolution]) -> AnnotatedDocument:
    return apply_substitutions(doc, resolutions, AliasMap([]))


def debug_report(result: CorefResult, alias_map: AliasMap) -> str:
    """Human-readable listing of resolutions, unresolved pronouns and classes."""
    lines = ["coreference:"]
    for r in result.resolutions:
        lines.append(
            f"  resolved  s{r.pronoun.span.sentence}:{r.pronoun.span.start} "
            f"{r.pronoun.surface!r} -> {r.antecedent.surface!r} [{r.rule}]"
        )
    for m in result.unresolved:
        lines.append(f"  unresolved s{m.span.sentence}:{m.span.start} {m.surface!r}")
    lines.append("alias classes:")
    for canonical, members in alias_map.classes():
        lines.append(f"  {canonical!r}: {sorted(members)}")
    return "\n".join(lines)
