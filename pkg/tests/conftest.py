import json
from pathlib import Path

import pytest

from proc2bpmn.annotation import AnnotatedDocument, EntitySpan, Token, parse_annotation_json
from proc2bpmn.lexicon import load_lexicon

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon()


@pytest.fixture(scope="session")
def narrative_doc() -> AnnotatedDocument:
    return parse_annotation_json((FIXTURES / "fixture.annotation.json").read_bytes())


@pytest.fixture(scope="session")
def golden_csv() -> bytes:
    return (FIXTURES / "table1.csv").read_bytes()


@pytest.fixture(scope="session")
def golden_bpmn() -> bytes:
    return (FIXTURES / "fixture.bpmn").read_bytes()


@pytest.fixture(scope="session")
def coref_cases() -> list[dict]:
    return json.loads((FIXTURES / "coref_suite.json").read_text("utf-8"))["cases"]


@pytest.fixture(scope="session")
def alias_suite() -> dict:
    return json.loads((FIXTURES / "alias_suite.json").read_text("utf-8"))


def build_doc(sentences, entities=(), chains=(), source_id="test") -> AnnotatedDocument:
    """Assemble a document from (form, lemma, upos, head, deprel) tuples."""
    built = tuple(
        tuple(
            Token(index=i + 1, form=f, lemma=l, upos=u, head=h, deprel=d)
            for i, (f, l, u, h, d) in enumerate(sentence)
        )
        for sentence in sentences
    )
    return AnnotatedDocument(
        sentences=built,
        entities=tuple(EntitySpan(*e) for e in entities),
        chains=tuple(chains),
        source_id=source_id,
    )
