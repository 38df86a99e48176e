"""Command-line entry point: extract, compile and run.

``extract`` turns annotations into the process-table CSV, ``compile`` turns a
CSV into a laid-out .bpmn file, and ``run`` goes end to end. Raw text input
is piped through an external annotator subprocess (text on stdin, annotation
JSON on stdout) named by ``--annotator``. Nothing is written on a non-zero
exit.

Exit codes: 1 input/schema errors, 2 extraction found no process content,
3 annotator subprocess failure.
"""

from __future__ import annotations

import shlex
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from . import annotation, bpmn, coreference, extraction, process_table
from .errors import (
    AnnotatorFailure,
    BadOrderLabel,
    CsvSchemaError,
    DanglingAlternative,
    EmptyProcess,
    MalformedInput,
    MalformedLexicon,
    NoParticipants,
    SchemaViolation,
    StaleResolution,
    TableInvariantError,
    UnlaidModel,
)
from .lexicon import Lexicon, load_lexicon

INPUT_KINDS = ("text", "annotation-json", "conllu", "table-csv")

_EXTENSION_KINDS = {
    ".txt": "text",
    ".text": "text",
    ".json": "annotation-json",
    ".conllu": "conllu",
    ".conll": "conllu",
    ".csv": "table-csv",
}

_INPUT_ERRORS = (
    MalformedInput,
    SchemaViolation,
    MalformedLexicon,
    CsvSchemaError,
    BadOrderLabel,
    TableInvariantError,
    DanglingAlternative,
    StaleResolution,
    UnlaidModel,
)
_EMPTY_ERRORS = (NoParticipants, EmptyProcess)


@dataclass
class PipelineConfig:
    in_path: Path
    out_path: Path
    kind: str                      # one of INPUT_KINDS after detection
    lexicon_path: Path | None = None
    annotator: str | None = None
    debug_coref: bool = False
    debug_svo: bool = False


def detect_kind(path: Path, explicit: str | None) -> str:
    if explicit and explicit != "auto":
        return explicit
    kind = _EXTENSION_KINDS.get(path.suffix.lower())
    if kind is None:
        raise MalformedInput(
            f"cannot infer input kind from {path.name!r}; pass --kind explicitly"
        )
    return kind


def _diag(message: str) -> None:
    click.echo(f"proc2bpmn: error: {message}", err=True)


def run_annotator(command: str, text: str) -> annotation.AnnotatedDocument:
    """Pipe raw text to the annotator subprocess and read annotation JSON back.

    Raises:
        AnnotatorFailure: non-zero exit status or invalid JSON output.
    """
    try:
        completed = subprocess.run(
            shlex.split(command),
            input=text.encode("utf-8"),
            capture_output=True,
            timeout=300,
        )
    except (OSError, subprocess.SubprocessError) as exc:
        raise AnnotatorFailure(f"annotator could not be run: {exc}") from exc
    if completed.returncode != 0:
        detail = completed.stderr.decode("utf-8", "replace").strip()
        raise AnnotatorFailure(
            f"annotator exited with status {completed.returncode}"
            + (f": {detail}" if detail else "")
        )
    try:
        return annotation.parse_annotation_json(completed.stdout)
    except (MalformedInput, SchemaViolation) as exc:
        raise AnnotatorFailure(f"annotator produced invalid annotation JSON: {exc}") from exc


def load_document(config: PipelineConfig) -> annotation.AnnotatedDocument:
    data = config.in_path.read_bytes()
    if config.kind == "annotation-json":
        return annotation.parse_annotation_json(data)
    if config.kind == "conllu":
        return annotation.parse_conllu(data)
    if config.kind == "text":
        if not config.annotator:
            raise MalformedInput("raw text input needs --annotator <cmd>")
        document = run_annotator(config.annotator, data.decode("utf-8"))
        if not document.source_id:
            document = annotation.AnnotatedDocument(
                sentences=document.sentences,
                entities=document.entities,
                chains=document.chains,
                source_id=config.in_path.stem,
            )
        return document
    raise MalformedInput(f"input kind {config.kind!r} is not a document format")


def extract_table(
    document: annotation.AnnotatedDocument,
    lexicon: Lexicon,
    debug_coref: bool = False,
    debug_svo: bool = False,
) -> process_table.ProcessTable:
    """The full analysis pipeline: coreference, aliases, SVO, conditions, table."""
    coref = coreference.resolve_anaphora(document)
    candidates = coreference.participant_candidates(document)
    alias_map = coreference.detect_aliases(candidates, lexicon)
    substituted = coreference.apply_substitutions(document, coref.resolutions, alias_map)
    if debug_coref:
        click.echo(coreference.debug_report(coref, alias_map), err=True)

    registry = extraction.extract_participants(substituted, alias_map, lexicon)
    triples = extraction.extract_svo(substituted, registry, lexicon)
    conditions = extraction.extract_conditions(substituted, triples, lexicon)
    termination = extraction.detect_termination(substituted, triples, lexicon)
    if debug_svo:
        for triple in triples:
            click.echo(f"svo: {triple}", err=True)
        for attachment in conditions:
            click.echo(f"condition: {attachment}", err=True)
        click.echo(f"termination sentence: {termination}", err=True)
    return process_table.build_table(triples, conditions, termination, registry)


def compile_table(table: process_table.ProcessTable, lexicon: Lexicon) -> bytes:
    model = bpmn.build_model(table, lexicon)
    return bpmn.serialize_xml(bpmn.layout(model))


def _common_options(command):
    options = [
        click.option("--in", "in_path", required=True, type=click.Path(path_type=Path, dir_okay=False)),
        click.option("--out", "out_path", required=True, type=click.Path(path_type=Path, dir_okay=False)),
        click.option("--kind", type=click.Choice(("auto",) + INPUT_KINDS), default="auto"),
        click.option("--lexicon", "lexicon_path", envvar="PROC2BPMN_LEXICON", type=click.Path(path_type=Path, dir_okay=False), default=None),
        click.option("--annotator", default=None, help="command reading text on stdin, writing annotation JSON on stdout"),
        click.option("--debug-coref", is_flag=True),
        click.option("--debug-svo", is_flag=True),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _run(config: PipelineConfig, stage: str) -> int:
    try:
        lexicon = load_lexicon(config.lexicon_path)
        if stage == "extract":
            if config.kind == "table-csv":
                raise MalformedInput("table-csv input cannot target table output")
            document = load_document(config)
            table = extract_table(document, lexicon, config.debug_coref, config.debug_svo)
            payload = process_table.serialize_csv(table)
        elif stage == "compile":
            if config.kind != "table-csv":
                raise MalformedInput("compile expects table-csv input")
            table = process_table.parse_csv(config.in_path.read_bytes())
            payload = compile_table(table, lexicon)
        else:  # run
            if config.kind == "table-csv":
                table = process_table.parse_csv(config.in_path.read_bytes())
            else:
                document = load_document(config)
                table = extract_table(document, lexicon, config.debug_coref, config.debug_svo)
            payload = compile_table(table, lexicon)
    except AnnotatorFailure as exc:
        _diag(str(exc))
        return 3
    except _EMPTY_ERRORS as exc:
        _diag(str(exc))
        return 2
    except _INPUT_ERRORS as exc:
        _diag(str(exc))
        return 1
    except OSError as exc:
        _diag(str(exc))
        return 1

    config.out_path.write_bytes(payload)
    return 0


@click.group()
def main():
    """Compile process narratives into process tables and BPMN diagrams."""


def _make_config(stage, in_path, out_path, kind, lexicon_path, annotator, debug_coref, debug_svo) -> int:
    try:
        detected = detect_kind(in_path, kind)
    except MalformedInput as exc:
        _diag(str(exc))
        return 1
    config = PipelineConfig(
        in_path=in_path,
        out_path=out_path,
        kind=detected,
        lexicon_path=lexicon_path,
        annotator=annotator,
        debug_coref=debug_coref,
        debug_svo=debug_svo,
    )
    return _run(config, stage)


@main.command("extract")
@_common_options
def extract_command(in_path, out_path, kind, lexicon_path, annotator, debug_coref, debug_svo):
    """Annotations (or text via --annotator) -> process-table CSV."""
    sys.exit(_make_config("extract", in_path, out_path, kind, lexicon_path, annotator, debug_coref, debug_svo))


@main.command("compile")
@_common_options
def compile_command(in_path, out_path, kind, lexicon_path, annotator, debug_coref, debug_svo):
    """Process-table CSV -> laid-out BPMN 2.0 XML."""
    sys.exit(_make_config("compile", in_path, out_path, kind, lexicon_path, annotator, debug_coref, debug_svo))


@main.command("run")
@_common_options
def run_command(in_path, out_path, kind, lexicon_path, annotator, debug_coref, debug_svo):
    """Text or annotations -> BPMN 2.0 XML, end to end."""
    sys.exit(_make_config("run", in_path, out_path, kind, lexicon_path, annotator, debug_coref, debug_svo))


if __name__ == "__main__":  # pragma: no cover
    main()
