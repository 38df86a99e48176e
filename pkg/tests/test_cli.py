import json
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from proc2bpmn.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, *args, env=None):
    return runner.invoke(main, list(args), env=env, catch_exceptions=False)


def fake_annotator(tmp_path, body) -> str:
    script = tmp_path / "annotator.py"
    script.write_text(body, encoding="utf-8")
    return f"{sys.executable} {script}"


OK_ANNOTATOR = f"""
import sys
sys.stdin.read()
sys.stdout.write(open({str(FIXTURES / 'fixture.annotation.json')!r}, encoding='utf-8').read())
"""

FAIL_ANNOTATOR = "import sys; sys.stderr.write('model missing'); sys.exit(5)\n"
GARBAGE_ANNOTATOR = "print('this is not json')\n"


def test_compile_golden(runner, tmp_path, golden_bpmn):
    out = tmp_path / "out.bpmn"
    result = invoke(runner, "compile", "--in", str(FIXTURES / "table1.csv"), "--out", str(out))
    assert result.exit_code == 0, result.output
    assert out.read_bytes() == golden_bpmn


def test_extract_golden(runner, tmp_path, golden_csv):
    out = tmp_path / "t.csv"
    result = invoke(
        runner, "extract", "--in", str(FIXTURES / "fixture.annotation.json"), "--out", str(out)
    )
    assert result.exit_code == 0, result.output
    assert out.read_bytes() == golden_csv


def test_run_equals_extract_then_compile(runner, tmp_path):
    table = tmp_path / "t.csv"
    staged = tmp_path / "staged.bpmn"
    direct = tmp_path / "direct.bpmn"
    assert invoke(
        runner, "extract", "--in", str(FIXTURES / "fixture.annotation.json"), "--out", str(table)
    ).exit_code == 0
    assert invoke(runner, "compile", "--in", str(table), "--out", str(staged)).exit_code == 0
    assert invoke(
        runner, "run", "--in", str(FIXTURES / "fixture.annotation.json"), "--out", str(direct)
    ).exit_code == 0
    assert direct.read_bytes() == staged.read_bytes()


def test_missing_input_exits_1(runner, tmp_path):
    out = tmp_path / "out.bpmn"
    result = invoke(runner, "compile", "--in", str(tmp_path / "nope.csv"), "--out", str(out))
    assert result.exit_code == 1
    assert not out.exists()


def test_compile_bad_header_exits_1(runner, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_bytes(b"Order,Task\n0,start\n")
    out = tmp_path / "out.bpmn"
    result = invoke(runner, "compile", "--in", str(bad), "--out", str(out))
    assert result.exit_code == 1
    assert "header" in result.output
    assert not out.exists()


def test_no_output_written_on_failure(runner, tmp_path):
    source = tmp_path / "empty.csv"
    source.write_bytes(b"Order,Activity,Condition,Who,Terminated\n")
    out = tmp_path / "never.bpmn"
    result = invoke(runner, "compile", "--in", str(source), "--out", str(out))
    assert result.exit_code == 2
    assert not out.exists()


def test_extract_rejects_table_csv(runner, tmp_path):
    out = tmp_path / "t.csv"
    result = invoke(runner, "extract", "--in", str(FIXTURES / "table1.csv"), "--out", str(out))
    assert result.exit_code == 1
    assert not out.exists()


def test_unknown_extension_needs_kind(runner, tmp_path):
    blob = tmp_path / "input.dat"
    blob.write_bytes((FIXTURES / "fixture.annotation.json").read_bytes())
    out = tmp_path / "o.csv"
    assert invoke(runner, "extract", "--in", str(blob), "--out", str(out)).exit_code == 1
    result = invoke(
        runner, "extract", "--in", str(blob), "--kind", "annotation-json", "--out", str(out)
    )
    assert result.exit_code == 0
    assert out.exists()


def test_conllu_input(runner, tmp_path):
    conllu = tmp_path / "doc.conllu"
    conllu.write_text(
        "1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_\n"
        "2\tClerk\tClerk\tPROPN\t_\t_\t3\tnsubj\t_\t_\n"
        "3\tsigns\tsign\tVERB\t_\t_\t0\troot\t_\t_\n"
        "4\tthe\tthe\tDET\t_\t_\t5\tdet\t_\t_\n"
        "5\tform\tform\tNOUN\t_\t_\t3\tdobj\t_\t_\n",
        encoding="utf-8",
    )
    out = tmp_path / "o.csv"
    result = invoke(runner, "extract", "--in", str(conllu), "--out", str(out))
    assert result.exit_code == 0
    assert b"Sign Form" in out.read_bytes()


def test_extract_no_participants_exits_2(runner, tmp_path):
    doc = {
        "source_id": "x",
        "sentences": [
            [
                {"index": 1, "form": "The", "lemma": "the", "upos": "DET", "head": 2, "deprel": "det"},
                {"index": 2, "form": "request", "lemma": "request", "upos": "NOUN", "head": 4, "deprel": "nsubjpass"},
                {"index": 3, "form": "is", "lemma": "be", "upos": "AUX", "head": 4, "deprel": "auxpass"},
                {"index": 4, "form": "archived", "lemma": "archive", "upos": "VERB", "head": 0, "deprel": "root"},
                {"index": 5, "form": ".", "lemma": ".", "upos": "PUNCT", "head": 4, "deprel": "punct"},
            ]
        ],
    }
    source = tmp_path / "doc.json"
    source.write_text(json.dumps(doc), encoding="utf-8")
    out = tmp_path / "o.csv"
    result = invoke(runner, "extract", "--in", str(source), "--out", str(out))
    assert result.exit_code == 2
    assert not out.exists()


def test_run_from_text_with_annotator(runner, tmp_path, golden_bpmn):
    command = fake_annotator(tmp_path, OK_ANNOTATOR)
    out = tmp_path / "o.bpmn"
    result = invoke(
        runner,
        "run",
        "--in",
        str(FIXTURES / "narrative.txt"),
        "--annotator",
        command,
        "--out",
        str(out),
    )
    assert result.exit_code == 0, result.output
    assert out.read_bytes() == golden_bpmn


def test_text_without_annotator_exits_1(runner, tmp_path):
    out = tmp_path / "o.bpmn"
    result = invoke(runner, "run", "--in", str(FIXTURES / "narrative.txt"), "--out", str(out))
    assert result.exit_code == 1


def test_failing_annotator_exits_3(runner, tmp_path):
    command = fake_annotator(tmp_path, FAIL_ANNOTATOR)
    out = tmp_path / "o.bpmn"
    result = invoke(
        runner, "run", "--in", str(FIXTURES / "narrative.txt"), "--annotator", command, "--out", str(out)
    )
    assert result.exit_code == 3
    assert "status 5" in result.output
    assert not out.exists()


def test_garbage_annotator_exits_3(runner, tmp_path):
    command = fake_annotator(tmp_path, GARBAGE_ANNOTATOR)
    out = tmp_path / "o.bpmn"
    result = invoke(
        runner, "run", "--in", str(FIXTURES / "narrative.txt"), "--annotator", command, "--out", str(out)
    )
    assert result.exit_code == 3
    assert not out.exists()


def test_debug_coref_reports(runner, tmp_path):
    out = tmp_path / "t.csv"
    result = invoke(
        runner,
        "extract",
        "--in",
        str(FIXTURES / "fixture.annotation.json"),
        "--out",
        str(out),
        "--debug-coref",
    )
    assert result.exit_code == 0
    assert "resolved" in result.output
    assert "alias classes" in result.output


def test_lexicon_env_var(runner, tmp_path):
    broken = tmp_path / "broken.tsv"
    broken.write_text("junk\n", encoding="utf-8")
    out = tmp_path / "o.bpmn"
    result = invoke(
        runner,
        "compile",
        "--in",
        str(FIXTURES / "table1.csv"),
        "--out",
        str(out),
        env={"PROC2BPMN_LEXICON": str(broken)},
    )
    assert result.exit_code == 1
    assert not out.exists()


def test_custom_lexicon_flag(runner, tmp_path, golden_bpmn):
    custom = tmp_path / "custom.tsv"
    custom.write_text(
        (Path("src/proc2bpmn/data/default_lexicon.tsv").read_text(encoding="utf-8")),
        encoding="utf-8",
    )
    out = tmp_path / "o.bpmn"
    result = invoke(
        runner,
        "compile",
        "--in",
        str(FIXTURES / "table1.csv"),
        "--out",
        str(out),
        "--lexicon",
        str(custom),
    )
    assert result.exit_code == 0
    assert out.read_bytes() == golden_bpmn
