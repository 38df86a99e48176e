"""Adapter contract tests.

The adapter is exercised the way the compiler uses it: as a subprocess with
text on stdin and annotation JSON on stdout. Output validity is checked with
the compiler's published schema validator, which is the interface contract.
"""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from proc2bpmn.annotation import parse_annotation_json, validate_document

TEXTS = sorted((Path(__file__).parent / "fixtures" / "texts").glob("*.txt"))
FROZEN_FIXTURE = Path(__file__).parents[2] / "tests" / "fixtures" / "fixture.annotation.json"
NARRATIVE = Path(__file__).parents[2] / "tests" / "fixtures" / "narrative.txt"


def annotate(text: str, *args: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "proc2bpmn_annotator.cli", *args],
        input=text.encode("utf-8"),
        capture_output=True,
    )


def test_ten_fixture_texts_validate():
    assert len(TEXTS) == 10
    for path in TEXTS:
        completed = annotate(path.read_text("utf-8"))
        assert completed.returncode == 0, (path.name, completed.stderr)
        document = parse_annotation_json(completed.stdout)
        assert validate_document(document) == [], path.name


def test_frozen_fixture_regenerates_identically():
    completed = annotate(NARRATIVE.read_text("utf-8"), "--source-id", "table1-narrative")
    assert completed.returncode == 0, completed.stderr
    assert completed.stdout == FROZEN_FIXTURE.read_bytes()


def test_start_sentence_shape():
    completed = annotate("Start.")
    assert completed.returncode == 0
    document = json.loads(completed.stdout)
    assert len(document["sentences"]) == 1
    tokens = document["sentences"][0]
    assert [t["form"] for t in tokens] == ["Start", "."]
    assert tokens[0]["upos"] == "VERB"
    assert tokens[0]["head"] == 0
    assert tokens[0]["deprel"] == "root"


def test_empty_input_exits_1():
    completed = annotate("")
    assert completed.returncode == 1
    completed = annotate("   \n  ")
    assert completed.returncode == 1


def test_missing_spacy_model_exits_2():
    try:
        import spacy  # noqa: F401

        pytest.skip("spaCy installed; missing-toolkit path not exercised here")
    except ImportError:
        pass
    completed = annotate("The Clerk signs.", "--backend", "spacy")
    assert completed.returncode == 2
    assert b"en_core_web_sm" in completed.stderr


def test_deterministic_output():
    text = TEXTS[0].read_text("utf-8")
    first = annotate(text).stdout
    second = annotate(text).stdout
    assert first == second


def test_entities_cover_roles_and_orgs():
    completed = annotate(NARRATIVE.read_text("utf-8"))
    document = json.loads(completed.stdout)
    labels = {e["label"] for e in document["entities"]}
    assert labels == {"ORG", "ROLE"}
    assert len(document["entities"]) == 6


def test_passive_by_phrase_maps_to_agent():
    completed = annotate("The request is reviewed by the Supervisor.")
    document = json.loads(completed.stdout)
    tokens = document["sentences"][0]
    deprels = {t["form"]: t["deprel"] for t in tokens}
    assert deprels["request"] == "nsubjpass"
    assert deprels["is"] == "auxpass"
    assert deprels["by"] == "agent"
    assert deprels["Supervisor"] == "pobj"


def test_manifest_reports_backend():
    completed = annotate("", "--manifest")
    assert completed.returncode == 0
    manifest = json.loads(completed.stdout)
    assert manifest["backend"] == "builtin"
    assert manifest["model"]["name"] == "builtin-rules"
    assert manifest["adapter"]


def test_compiler_consumes_adapter_end_to_end(tmp_path):
    # full loop through the published subprocess protocol
    out = tmp_path / "out.bpmn"
    completed = subprocess.run(
        [
            sys.executable,
            "-m",
            "proc2bpmn.cli",
            "run",
            "--in",
            str(NARRATIVE),
            "--annotator",
            f"{sys.executable} -m proc2bpmn_annotator.cli --source-id table1-narrative",
            "--out",
            str(out),
        ],
        capture_output=True,
    )
    assert completed.returncode == 0, completed.stderr
    golden = (Path(__file__).parents[2] / "tests" / "fixtures" / "fixture.bpmn").read_bytes()
    assert out.read_bytes() == golden
