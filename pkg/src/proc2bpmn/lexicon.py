"""Grammatical-role descriptors, verb/keyword classes and the synonym provider.

The member sets are data, not code: they ship in ``data/default_lexicon.tsv``
and can be replaced wholesale through ``--lexicon`` (file format documented in
the README). A loaded :class:`Lexicon` is immutable and safe to read from any
thread.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import MalformedLexicon


class Descriptor(enum.Enum):
    """Dependency roles the extractor consumes, keyed by their label strings."""

    SUBJECT = "nsubj"
    PASSIVE_SUBJECT = "nsubjpass"
    OBJECT = "dobj"
    ATTRIBUTE = "attr"
    PREP_OBJECT = "pobj"
    AGENT = "agent"
    CLAUSE_MARKER = "mark"
    ADVERBIAL_CLAUSE = "advcl"
    CONJUNCT = "conj"
    PARTICLE = "prt"
    ROOT = "root"

    @classmethod
    def from_label(cls, label: str) -> "Descriptor | None":
        """Total lookup over the known labels; unknown labels map to None.

        Universal-Dependencies spellings of the same relations are accepted
        (see DEPREL_ALIASES); anything else is ignored by the extraction rules.
        """
        label = DEPREL_ALIASES.get(label, label)
        return _DESCRIPTOR_BY_LABEL.get(label)


# UD-style labels emitted by newer toolkits, mapped onto the inventory above.
DEPREL_ALIASES = {
    "obj": "dobj",
    "nsubj:pass": "nsubjpass",
    "obl:agent": "agent",
    "compound:prt": "prt",
}

_DESCRIPTOR_BY_LABEL = {member.value: member for member in Descriptor}


class VerbType(enum.Enum):
    MESSAGE = "message"
    TERMINATION = "termination"
    GENERIC_ACTION = "generic_action"


class KeywordType(enum.Enum):
    CONDITIONAL = "conditional"
    ALTERNATIVE = "alternative"
    SEQUENCE = "sequence"
    NONE = "none"


_KEYWORD_RELATIONS = {
    "keyword.conditional": KeywordType.CONDITIONAL,
    "keyword.alternative": KeywordType.ALTERNATIVE,
    "keyword.sequence": KeywordType.SEQUENCE,
}

_KNOWN_RELATIONS = frozenset(
    {
        "verb.message",
        "verb.termination",
        "verb.antonym",
        "keyword.conditional",
        "keyword.alternative",
        "keyword.sequence",
        "keyword.role",
        "noun.process",
        "synonym",
        "hypernym",
    }
)


@dataclass(frozen=True)
class SynonymProvider:
    """Flat-file synonym/hypernym lookup with symmetric synonymy."""

    synonyms: dict[str, frozenset[str]]
    hypernyms: dict[str, frozenset[str]]

    def synonyms_of(self, lemma: str) -> frozenset[str]:
        return self.synonyms.get(lemma.lower(), frozenset())

    def hypernyms_of(self, lemma: str) -> frozenset[str]:
        return self.hypernyms.get(lemma.lower(), frozenset())


@dataclass(frozen=True)
class Lexicon:
    message_verbs: frozenset[str]
    termination_verbs: frozenset[str]
    conditional_keywords: frozenset[str]
    alternative_keywords: frozenset[str]
    sequence_keywords: frozenset[str]
    role_nouns: frozenset[str]
    process_nouns: frozenset[str]
    antonym_pairs: tuple[tuple[str, str], ...]
    provider: SynonymProvider

    def classify_verb(self, lemma: str) -> VerbType:
        """Classify a verb lemma; total, deterministic, case-insensitive."""
        lemma = lemma.lower()
        if lemma in self.message_verbs:
            return VerbType.MESSAGE
        if lemma in self.termination_verbs:
            return VerbType.TERMINATION
        return VerbType.GENERIC_ACTION

    def classify_keyword(self, word_or_phrase: str) -> KeywordType:
        """Classify a word or phrase against the keyword sets."""
        text = " ".join(word_or_phrase.lower().split())
        if text in self.conditional_keywords:
            return KeywordType.CONDITIONAL
        if text in self.alternative_keywords:
            return KeywordType.ALTERNATIVE
        if text in self.sequence_keywords:
            return KeywordType.SEQUENCE
        return KeywordType.NONE

    def keyword_at(self, forms: list[str], start: int) -> tuple[KeywordType, int]:
        """Longest keyword match beginning at ``forms[start]``.

        Returns the keyword type and the number of tokens consumed (0 when
        nothing matches), so multiword entries like "in case" win over "in".
        """
        longest = max((len(k.split()) for k in self._all_keywords()), default=1)
        for width in range(min(longest, len(forms) - start), 0, -1):
            candidate = " ".join(f.lower() for f in forms[start : start + width])
            kind = self.classify_keyword(candidate)
            if kind is not KeywordType.NONE:
                return kind, width
        return KeywordType.NONE, 0

    def _all_keywords(self) -> frozenset[str]:
        return self.conditional_keywords | self.alternative_keywords | self.sequence_keywords

    def synonyms_of(self, lemma: str) -> frozenset[str]:
        """Loaded synonym set; never contains the query lemma itself."""
        return self.provider.synonyms_of(lemma)

    def antonym_of(self, lemma: str) -> str | None:
        """Counterpart verb from the antonym pairs; first matching pair wins."""
        lemma = lemma.lower()
        for left, right in self.antonym_pairs:
            if lemma == left:
                return right
            if lemma == right:
                return left
        return None

    def is_process_noun(self, lemma: str) -> bool:
        return lemma.lower() in self.process_nouns


def load_lexicon(path: str | Path | None = None) -> Lexicon:
    """Load a lexicon file, or the built-in default when ``path`` is None.

    Raises:
        MalformedLexicon: a line has no lemmas, an unknown relation, or puts
            one lemma in conflicting verb/keyword sets.
    """
    if path is None:
        text = resources.files("proc2bpmn.data").joinpath("default_lexicon.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return _parse_lexicon(text)


def _parse_lexicon(text: str) -> Lexicon:
    sets: dict[str, set[str]] = {relation: set() for relation in _KNOWN_RELATIONS}
    antonym_pairs: list[tuple[str, str]] = []
    synonym_groups: list[list[str]] = []
    hypernym_edges: list[tuple[str, str]] = []

    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        columns = [c.strip() for c in line.split("\t")]
        if len(columns) < 2 or not columns[0] or not all(columns[1:]):
            raise MalformedLexicon(f"line {line_no}: expected relation<TAB>lemma...")
        relation, *lemmas = columns
        lemmas = [" ".join(l.lower().split()) for l in lemmas]
        if relation not in _KNOWN_RELATIONS:
            raise MalformedLexicon(f"line {line_no}: unknown relation {relation!r}")
        if relation == "synonym":
            if len(lemmas) < 2:
                raise MalformedLexicon(f"line {line_no}: synonym needs at least two lemmas")
            synonym_groups.append(lemmas)
        elif relation == "hypernym":
            if len(lemmas) < 2:
                raise MalformedLexicon(f"line {line_no}: hypernym needs a lemma and a hypernym")
            head, *hypers = lemmas
            hypernym_edges.extend((head, h) for h in hypers)
        elif relation == "verb.antonym":
            if len(lemmas) != 2:
                raise MalformedLexicon(f"line {line_no}: verb.antonym needs exactly two lemmas")
            antonym_pairs.append((lemmas[0], lemmas[1]))
        else:
            sets[relation].update(lemmas)

    clash = sets["verb.message"] & sets["verb.termination"]
    if clash:
        raise MalformedLexicon(
            f"conflicting entries in both verb.message and verb.termination: {sorted(clash)}"
        )
    keyword_sets = [sets[r] for r in _KEYWORD_RELATIONS]
    for i, left in enumerate(keyword_sets):
        for right in keyword_sets[i + 1 :]:
            clash = left & right
            if clash:
                raise MalformedLexicon(f"conflicting keyword entries: {sorted(clash)}")

    synonyms: dict[str, set[str]] = {}
    for group in synonym_groups:
        for lemma in group:
            bucket = synonyms.setdefault(lemma, set())
            bucket.update(other for other in group if other != lemma)
    # close the relation symmetrically
    for lemma, others in list(synonyms.items()):
        for other in others:
            synonyms.setdefault(other, set()).add(lemma)
    hypernyms: dict[str, set[str]] = {}
    for lemma, hyper in hypernym_edges:
        hypernyms.setdefault(lemma, set()).add(hyper)

    provider = SynonymProvider(
        synonyms={k: frozenset(v) for k, v in synonyms.items()},
        hypernyms={k: frozenset(v) for k, v in hypernyms.items()},
    )
    return Lexicon(
        message_verbs=frozenset(sets["verb.message"]),
        termination_verbs=frozenset(sets["verb.termination"]),
        conditional_keywords=frozenset(sets["keyword.conditional"]),
        alternative_keywords=frozenset(sets["keyword.alternative"]),
        sequence_keywords=frozenset(sets["keyword.sequence"]),
        role_nouns=frozenset(sets["keyword.role"]),
        process_nouns=frozenset(sets["noun.process"]),
        antonym_pairs=tuple(antonym_pairs),
        provider=provider,
    )
