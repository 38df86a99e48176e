import pytest
from hypothesis import given
from hypothesis import strategies as st

from proc2bpmn.annotation import CorefChain, parse_annotation_json
from proc2bpmn.coreference import (
    AliasMap,
    Mention,
    MentionKind,
    Span,
    apply_substitutions,
    collect_mentions,
    detect_aliases,
    normalize_surface,
    participant_candidates,
    resolve_anaphora,
)
from proc2bpmn.errors import StaleResolution

from .conftest import build_doc

import json


def _case_doc(case):
    return parse_annotation_json(json.dumps(case["document"]))


def _sentence_text(doc, index):
    return " ".join(t.form for t in doc.sentence(index))


def mention(surface, head_lemma, kind=MentionKind.NOMINAL, sentence=1, start=1):
    tokens = surface.split()
    return Mention(
        span=Span(sentence, start, start + len(tokens)),
        surface=surface,
        head_lemma=head_lemma,
        kind=kind,
        head_index=start + len(tokens) - 1,
        deprel="nsubj",
    )


def test_basic_nearest_subject(coref_cases):
    case = next(c for c in coref_cases if c["name"] == "nearest-subject-basic")
    doc = _case_doc(case)
    result = resolve_anaphora(doc)
    assert len(result.resolutions) == 1
    resolution = result.resolutions[0]
    assert resolution.antecedent.surface == "The Production Manager"
    assert resolution.rule == "nearest-subject"
    assert _sentence_text(result.document, 2) == (
        "The Production Manager informs the Affairs Department ."
    )


def test_no_pronouns_is_identity(narrative_doc):
    doc = build_doc(
        [
            [
                ("The", "the", "DET", 2, "det"),
                ("clerk", "clerk", "NOUN", 3, "nsubj"),
                ("signs", "sign", "VERB", 0, "root"),
                (".", ".", "PUNCT", 3, "punct"),
            ]
        ]
    )
    result = resolve_anaphora(doc)
    assert result.document == doc
    assert result.resolutions == ()


def test_precomputed_chain_takes_precedence():
    doc = build_doc(
        [
            [
                ("The", "the", "DET", 2, "det"),
                ("director", "director", "NOUN", 3, "nsubj"),
                ("approves", "approve", "VERB", 0, "root"),
                ("it", "it", "PRON", 3, "dobj"),
                (".", ".", "PUNCT", 3, "punct"),
            ],
            [
                ("She", "she", "PRON", 2, "nsubj"),
                ("signs", "sign", "VERB", 0, "root"),
                (".", ".", "PUNCT", 2, "punct"),
            ],
        ],
        chains=[CorefChain(mentions=((1, 1, 3), (2, 1, 2)))],
    )
    result = resolve_anaphora(doc)
    she = next(r for r in result.resolutions if r.pronoun.surface == "She")
    assert she.antecedent.surface == "The director"
    assert she.rule == "input-chain"
    assert _sentence_text(result.document, 2) == "The director signs ."


def test_first_and_second_person_unresolved():
    doc = build_doc(
        [
            [
                ("The", "the", "DET", 2, "det"),
                ("clerk", "clerk", "NOUN", 3, "nsubj"),
                ("files", "file", "VERB", 0, "root"),
                (".", ".", "PUNCT", 3, "punct"),
            ],
            [
                ("We", "we", "PRON", 2, "nsubj"),
                ("sign", "sign", "VERB", 0, "root"),
                (".", ".", "PUNCT", 2, "punct"),
            ],
        ]
    )
    result = resolve_anaphora(doc)
    assert result.resolutions == ()
    assert [m.surface for m in result.unresolved] == ["We"]


def test_antecedent_precedes_pronoun(coref_cases):
    for case in coref_cases:
        result = resolve_anaphora(_case_doc(case))
        for resolution in result.resolutions:
            assert (
                resolution.antecedent.span.sentence,
                resolution.antecedent.span.start,
            ) < (resolution.pronoun.span.sentence, resolution.pronoun.span.start)
            assert resolution.antecedent.kind is not MentionKind.PRONOUN


# ---------------------------------------------------------------- aliases

def test_alias_case_fold_and_determiner_strip(lexicon):
    mentions = [
        mention("the Affairs Director", "director", sentence=1),
        mention("The affairs director", "director", sentence=2),
    ]
    alias_map = detect_aliases(mentions, lexicon)
    assert len(alias_map.classes()) == 1
    canonical, members = alias_map.classes()[0]
    assert canonical == "Affairs Director"
    assert members == frozenset({"the Affairs Director", "The affairs director"})


def test_alias_suffix_rule(lexicon):
    mentions = [
        mention("the director", "director", sentence=1),
        mention("the Affairs Director", "director", sentence=2),
        mention("the Production Manager", "manager", sentence=3),
    ]
    alias_map = detect_aliases(mentions, lexicon)
    by_canonical = dict(alias_map.classes())
    assert set(by_canonical) == {"Affairs Director", "Production Manager"}
    assert by_canonical["Affairs Director"] == frozenset(
        {"the director", "the Affairs Director"}
    )


def test_alias_disjoint_heads_stay_apart(lexicon):
    mentions = [
        mention("Affairs Department", "department", sentence=1),
        mention("Production Manager", "manager", sentence=2),
    ]
    alias_map = detect_aliases(mentions, lexicon)
    assert len(alias_map.classes()) == 2


def test_alias_map_is_partition_with_idempotent_canonical(alias_suite, lexicon):
    mentions = [
        mention(s["surface"], s["head_lemma"], sentence=i + 1)
        for i, s in enumerate(alias_suite["surfaces"])
    ]
    alias_map = detect_aliases(mentions, lexicon)
    seen = set()
    for canonical, members in alias_map.classes():
        assert not (members & seen)
        seen |= members
        assert alias_map.canonical_of(canonical) == canonical
        for member in members:
            assert alias_map.canonical_of(member) == canonical
    assert seen == {s["surface"] for s in alias_suite["surfaces"]}


@given(st.randoms(use_true_random=False))
def test_alias_merging_order_independent(rng):
    lexicon = __import__("proc2bpmn.lexicon", fromlist=["load_lexicon"]).load_lexicon()
    surfaces = [
        ("the director", "director"),
        ("the Affairs Director", "director"),
        ("the manager", "manager"),
        ("the supervisor", "supervisor"),
        ("the Review Board", "board"),
    ]
    baseline = detect_aliases(
        [mention(s, h, sentence=i + 1) for i, (s, h) in enumerate(surfaces)], lexicon
    )
    shuffled = surfaces[:]
    rng.shuffle(shuffled)
    permuted = detect_aliases(
        [mention(s, h, sentence=i + 1) for i, (s, h) in enumerate(shuffled)], lexicon
    )
    assert baseline == permuted


# ---------------------------------------------------------------- substitutions

def test_apply_substitutions_empty_is_identity(narrative_doc):
    assert apply_substitutions(narrative_doc, (), AliasMap([])) == apply_substitutions(
        narrative_doc, (), AliasMap([])
    )
    doc = build_doc([[("Start", "start", "VERB", 0, "root")]])
    assert apply_substitutions(doc, (), AliasMap([])) == doc


def test_apply_substitutions_production_manager(coref_cases):
    case = next(c for c in coref_cases if c["name"] == "nearest-subject-basic")
    doc = _case_doc(case)
    result = resolve_anaphora(doc)
    substituted = apply_substitutions(doc, result.resolutions, AliasMap([]))
    assert _sentence_text(substituted, 2) == (
        "The Production Manager informs the Affairs Department ."
    )


def test_apply_substitutions_idempotent(narrative_doc, lexicon):
    result = resolve_anaphora(narrative_doc)
    alias_map = detect_aliases(participant_candidates(narrative_doc), lexicon)
    once = apply_substitutions(narrative_doc, result.resolutions, alias_map)
    twice = apply_substitutions(once, result.resolutions, alias_map)
    assert once == twice


def test_stale_resolution(narrative_doc):
    result = resolve_anaphora(narrative_doc)
    assert result.resolutions
    # a document whose pronoun token was edited no longer matches
    tampered = build_doc(
        [
            [(t.form + "x" if t.upos == "PRON" else t.form, t.lemma, t.upos, t.head, t.deprel)
             for t in sentence]
            for sentence in narrative_doc.sentences
        ],
        entities=[(e.sentence, e.start, e.end, e.label) for e in narrative_doc.entities],
    )
    with pytest.raises(StaleResolution):
        apply_substitutions(tampered, result.resolutions, AliasMap([]))


def test_collect_mentions_kinds(narrative_doc):
    mentions = collect_mentions(narrative_doc)
    pronouns = [m for m in mentions if m.kind is MentionKind.PRONOUN]
    assert [m.surface for m in pronouns] == ["he"]
    assert all(
        (m.span.end - m.span.start == 1) == (m.kind is MentionKind.PRONOUN)
        or m.kind is not MentionKind.PRONOUN
        for m in mentions
    )


def test_normalize_surface():
    assert normalize_surface("The Affairs Director") == "affairs director"
    assert normalize_surface("a report.") == "report"
    assert normalize_surface("  AN  Invoice ") == "invoice"


def test_registry_hint_narrows_candidates():
    doc = build_doc(
        [
            [
                ("The", "the", "DET", 2, "det"),
                ("clerk", "clerk", "NOUN", 3, "nsubj"),
                ("files", "file", "VERB", 0, "root"),
                ("the", "the", "DET", 5, "det"),
                ("report", "report", "NOUN", 3, "dobj"),
                (".", ".", "PUNCT", 3, "punct"),
            ],
            [
                ("The", "the", "DET", 2, "det"),
                ("manager", "manager", "NOUN", 3, "nsubj"),
                ("signs", "sign", "VERB", 0, "root"),
                (".", ".", "PUNCT", 3, "punct"),
            ],
            [
                ("He", "he", "PRON", 2, "nsubj"),
                ("reports", "report", "VERB", 0, "root"),
                (".", ".", "PUNCT", 2, "punct"),
            ],
        ]
    )
    unhinted = resolve_anaphora(doc)
    assert unhinted.resolutions[0].antecedent.surface == "The manager"
    hinted = resolve_anaphora(doc, registry_hint=["the clerk"])
    assert hinted.resolutions[0].antecedent.surface == "The clerk"
