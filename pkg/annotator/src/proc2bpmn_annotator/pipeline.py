"""Built-in deterministic annotation pipeline.

A rule-based English tokenizer, tagger, lemmatizer, dependency parser and
entity recognizer tuned for business-process narratives: short declarative
sentences, optional leading conditional clauses, passives with by-phrases and
verb conjunctions. It has no learned components, so identical input always
yields identical output; the compiler's own coreference rules cover pronouns,
so no chains are emitted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

TOKEN_RE = re.compile(r"[A-Za-z0-9'’-]+|[.,;:!?()\"]")
SENTENCE_FINAL = {".", "!", "?"}

DETERMINERS = {"the", "a", "an"}
PRONOUNS = {
    "he", "him", "his", "she", "her", "hers", "it", "its", "they", "them", "their",
    "himself", "herself", "itself", "themselves", "i", "we", "you", "me", "us",
}
SUBORDINATORS = {"if", "when", "whether", "once", "unless"}
COORDINATORS = {"and", "or", "but"}
AUXILIARIES = {
    "is", "are", "was", "were", "be", "been", "being", "am",
    "has", "have", "had", "does", "do", "did",
    "will", "would", "can", "could", "may", "might", "must", "shall", "should",
}
ADVERBS = {
    "then", "otherwise", "afterwards", "next", "subsequently", "also", "later",
    "finally", "meanwhile", "however", "therefore", "first", "second",
}
ADPOSITIONS = {
    "by", "of", "in", "on", "at", "for", "with", "from", "into", "to",
    "after", "before", "during", "through", "about", "under", "over",
}
NEGATION = {"not"}

BASE_VERBS = [
    "follow", "inform", "reject", "close", "document", "send", "check",
    "terminate", "review", "sign", "approve", "forward", "archive", "submit",
    "notify", "end", "finish", "start", "prepare", "receive", "verify",
    "escalate", "update", "create", "file", "examine", "assign", "complete",
    "upload", "dispatch", "publish", "log", "stamp", "brief", "consult",
    "calculate", "deliver", "inspect", "draft", "visit", "wait", "report",
    "stop", "begin", "collect", "record", "store", "print", "scan", "require",
]

IRREGULAR_LEMMAS = {
    "is": "be", "are": "be", "was": "be", "were": "be", "been": "be",
    "being": "be", "am": "be", "has": "have", "had": "have", "does": "do",
    "did": "do", "sent": "send", "made": "make", "went": "go",
}

ORG_HEADS = {
    "department", "division", "office", "board", "committee", "team",
    "group", "unit", "bureau", "agency", "council",
}
ROLE_HEADS = {
    "manager", "director", "secretary", "officer", "clerk", "analyst",
    "supervisor", "engineer", "accountant", "administrator", "inspector",
    "foreman", "treasurer", "auditor", "coordinator", "assistant",
}


def _third_singular(base: str) -> str:
    if re.search(r"[^aeiou]y$", base):
        return base[:-1] + "ies"
    if re.search(r"(s|x|z|ch|sh|o)$", base):
        return base + "es"
    return base + "s"


def _past(base: str) -> str:
    if base.endswith("e"):
        return base + "d"
    if re.search(r"[^aeiou]y$", base):
        return base[:-1] + "ied"
    return base + "ed"


def _gerund(base: str) -> str:
    if base.endswith("e") and not base.endswith("ee"):
        return base[:-1] + "ing"
    return base + "ing"


def _verb_form_table() -> dict[str, str]:
    forms: dict[str, str] = {}
    for base in BASE_VERBS:
        for form in (base, _third_singular(base), _past(base), _gerund(base)):
            forms.setdefault(form, base)
    return forms


VERB_FORMS = _verb_form_table()
PAST_FORMS = {_past(base) for base in BASE_VERBS}


@dataclass
class Word:
    index: int
    form: str
    lemma: str = ""
    upos: str = ""
    head: int = 0
    deprel: str = ""


def tokenize(text: str) -> list[list[str]]:
    """Split text into sentences of surface tokens."""
    tokens = TOKEN_RE.findall(text)
    sentences: list[list[str]] = []
    current: list[str] = []
    for token in tokens:
        current.append(token)
        if token in SENTENCE_FINAL:
            sentences.append(current)
            current = []
    if current:
        sentences.append(current)
    return sentences


def _singular(noun: str) -> str:
    if re.search(r"[^aeiou]ies$", noun):
        return noun[:-3] + "y"
    if re.search(r"(ses|xes|zes|ches|shes)$", noun):
        return noun[:-2]
    if noun.endswith("s") and not noun.endswith(("ss", "us", "is")) and len(noun) > 3:
        return noun[:-1]
    return noun


def tag(sentence: list[str]) -> list[Word]:
    """Assign POS tags and lemmas with ordered lexicon and shape rules."""
    words = [Word(index=i + 1, form=form) for i, form in enumerate(sentence)]
    for i, word in enumerate(words):
        form = word.form
        lower = form.lower()
        previous = words[i - 1] if i else None
        if not form[0].isalnum():
            word.upos, word.lemma = "PUNCT", form
        elif lower in DETERMINERS:
            word.upos, word.lemma = "DET", lower
        elif lower in PRONOUNS:
            word.upos, word.lemma = "PRON", lower
        elif lower in SUBORDINATORS:
            word.upos, word.lemma = "SCONJ", lower
        elif lower in COORDINATORS:
            word.upos, word.lemma = "CCONJ", lower
        elif lower in AUXILIARIES:
            word.upos, word.lemma = "AUX", IRREGULAR_LEMMAS.get(lower, lower)
        elif lower in NEGATION:
            word.upos, word.lemma = "PART", lower
        elif lower in ADVERBS:
            word.upos, word.lemma = "ADV", lower
        elif lower in ADPOSITIONS:
            word.upos, word.lemma = "ADP", lower
        elif lower in VERB_FORMS and not (previous is not None and previous.upos == "DET"):
            word.upos, word.lemma = "VERB", VERB_FORMS[lower]
        elif lower in PAST_FORMS:
            # participle after a determiner modifies the following noun
            word.upos, word.lemma = "ADJ", lower
        elif form[0].isupper():
            word.upos, word.lemma = "PROPN", form
        else:
            word.upos, word.lemma = "NOUN", _singular(lower)
    return words


def _noun_chunks(words: list[Word], span: range) -> list[list[Word]]:
    chunks: list[list[Word]] = []
    current: list[Word] = []
    for i in span:
        word = words[i]
        if word.upos in {"DET", "ADJ", "NOUN", "PROPN"}:
            current.append(word)
        else:
            if current:
                chunks.append(current)
            current = []
    if current:
        chunks.append(current)
    return chunks


def _attach_chunk(chunk: list[Word], head_deprel: str, head_target: int) -> None:
    head = chunk[-1]
    head.head = head_target
    head.deprel = head_deprel
    for word in chunk[:-1]:
        word.head = head.index
        if word.upos == "DET":
            word.deprel = "det"
        elif word.upos == "ADJ":
            word.deprel = "amod"
        else:
            word.deprel = "compound"


def _clause_verb(words: list[Word], span: range) -> Word | None:
    for i in span:
        if words[i].upos == "VERB":
            return words[i]
    return None


def _parse_clause(words: list[Word], span: range, verb: Word) -> None:
    """Attach the tokens of one clause around its verb."""
    indices = list(span)
    passive = any(
        words[i].upos == "AUX" and words[i].lemma == "be" for i in indices if i < verb.index - 1
    ) and verb.form.lower() in PAST_FORMS

    before = range(indices[0], verb.index - 1)
    after = range(verb.index, indices[-1] + 1)

    subject_chunks = _noun_chunks(words, before)
    if subject_chunks:
        _attach_chunk(subject_chunks[-1], "nsubjpass" if passive else "nsubj", verb.index)
        for chunk in subject_chunks[:-1]:
            _attach_chunk(chunk, "dep", verb.index)

    conj_verb: Word | None = None
    preposition: Word | None = None
    pending: list[Word] = []

    def flush(noun_deprel: str, target: int) -> str:
        nonlocal pending
        if pending:
            _attach_chunk(pending, noun_deprel, target)
            pending = []
            return "dobj"
        return noun_deprel

    object_deprel = "dobj"
    object_target = verb.index
    for i in after:
        word = words[i]
        if word is verb:
            continue
        if word.upos in {"DET", "ADJ", "NOUN", "PROPN"}:
            pending.append(word)
            continue
        object_deprel = flush(
            "pobj" if preposition is not None else object_deprel,
            preposition.index if preposition is not None else object_target,
        )
        preposition = None
        if word.upos == "PRON":
            word.head = object_target if conj_verb is None else conj_verb.index
            word.deprel = "dobj"
        elif word.upos == "ADP":
            word.head = object_target
            word.deprel = "agent" if passive and word.lemma == "by" else "prep"
            preposition = word
        elif word.upos == "CCONJ":
            word.head = verb.index
            word.deprel = "cc"
        elif word.upos == "VERB":
            word.head = verb.index
            word.deprel = "conj"
            conj_verb = word
            object_target = word.index
        elif word.upos == "ADV":
            word.head = verb.index
            word.deprel = "advmod"
        elif word.upos == "PUNCT":
            word.head = verb.index
            word.deprel = "punct"
        elif word.upos == "PART":
            word.head = verb.index
            word.deprel = "neg"
        else:
            word.head = verb.index
            word.deprel = "dep"
    flush("pobj" if preposition is not None else object_deprel,
          preposition.index if preposition is not None else object_target)

    for i in before:
        word = words[i]
        if word.deprel:
            continue
        if word.upos == "AUX":
            word.deprel = "auxpass" if passive else "aux"
            word.head = verb.index
        elif word.upos == "PRON":
            word.deprel = "nsubjpass" if passive else "nsubj"
            word.head = verb.index
        elif word.upos == "ADV":
            word.deprel = "advmod"
            word.head = verb.index
        elif word.upos == "PART":
            word.deprel = "neg"
            word.head = verb.index
        elif word.upos == "PUNCT":
            word.deprel = "punct"
            word.head = verb.index
        else:
            word.deprel = "dep"
            word.head = verb.index


def parse(words: list[Word]) -> list[Word]:
    """Dependency-parse one tagged sentence in place."""
    n = len(words)
    subordinate: range | None = None
    main: range = range(0, n)
    if words and words[0].upos == "SCONJ":
        comma = next((i for i in range(n) if words[i].form == ","), None)
        if comma is not None:
            sub_verb = _clause_verb(words, range(1, comma))
            main_verb = _clause_verb(words, range(comma + 1, n))
            if sub_verb is not None and main_verb is not None:
                subordinate = range(1, comma)
                main = range(comma + 1, n)

    main_verb = _clause_verb(words, main)
    if main_verb is None:
        # verbless fragment: first token is the nominal root
        root = words[main.start if subordinate is None else 0]
        root.head, root.deprel = 0, "root"
        for word in words:
            if word is root:
                continue
            word.head = root.index
            word.deprel = "punct" if word.upos == "PUNCT" else "dep"
        return words

    main_verb.head, main_verb.deprel = 0, "root"
    _parse_clause(words, main, main_verb)

    if subordinate is not None:
        sub_verb = _clause_verb(words, subordinate)
        sub_verb.head, sub_verb.deprel = main_verb.index, "advcl"
        words[0].head, words[0].deprel = sub_verb.index, "mark"
        _parse_clause(words, subordinate, sub_verb)

    for word in words:
        if not word.deprel:
            word.head = main_verb.index
            word.deprel = "punct" if word.upos == "PUNCT" else "dep"
    return words


def entities(sentences: list[list[Word]]) -> list[dict]:
    """Label maximal runs of proper nouns by their head word."""
    spans = []
    for s_no, words in enumerate(sentences, start=1):
        run: list[Word] = []
        for word in words + [Word(index=0, form="", upos="")]:
            if word.upos == "PROPN":
                run.append(word)
                continue
            if run:
                head = run[-1].form.lower()
                label = "ORG" if head in ORG_HEADS else "ROLE" if head in ROLE_HEADS else None
                if label:
                    spans.append(
                        {
                            "sentence": s_no,
                            "start": run[0].index,
                            "end": run[-1].index + 1,
                            "label": label,
                        }
                    )
                run = []
    return spans


def annotate_text(text: str, source_id: str = "") -> dict:
    """Full pipeline: raw text to the annotation interchange structure."""
    token_sentences = tokenize(text)
    parsed = [parse(tag(sentence)) for sentence in token_sentences]
    return {
        "source_id": source_id,
        "sentences": [
            [
                {
                    "index": w.index,
                    "form": w.form,
                    "lemma": w.lemma,
                    "upos": w.upos,
                    "head": w.head,
                    "deprel": w.deprel,
                }
                for w in words
            ]
            for words in parsed
        ],
        "entities": entities(parsed),
        "chains": [],
    }
