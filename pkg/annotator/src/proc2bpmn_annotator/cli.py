"""Annotator subprocess: text on stdin, annotation JSON on stdout.

Exit codes: 1 empty input, 2 toolkit load failure (the message names the
missing model). The manifest records backend and model versions so frozen
fixtures stay reproducible.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import pipeline, serialize
from .spacy_backend import ToolkitUnavailable


def manifest(backend: str, model: str) -> dict:
    data = {"adapter": __version__, "backend": backend}
    if backend == "spacy":
        from .spacy_backend import model_versions

        data["model"] = model_versions(model)
    else:
        data["model"] = {"name": "builtin-rules", "version": __version__}
    return data


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="proc2bpmn-annotate",
        description="Annotate process narrative text for the proc2bpmn compiler.",
    )
    parser.add_argument(
        "--backend",
        choices=("builtin", "spacy"),
        default="builtin",
        help="annotation engine (default: builtin deterministic rules)",
    )
    parser.add_argument(
        "--model",
        default="en_core_web_sm",
        help="spaCy model name for --backend spacy",
    )
    parser.add_argument("--source-id", default="", help="document id stored in the output")
    parser.add_argument(
        "--manifest",
        action="store_true",
        help="print backend and model versions as JSON and exit",
    )
    args = parser.parse_args(argv)

    if args.manifest:
        json.dump(manifest(args.backend, args.model), sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0

    text = sys.stdin.read()
    if not text.strip():
        sys.stderr.write("proc2bpmn-annotate: error: empty input\n")
        return 1

    if args.backend == "spacy":
        from .spacy_backend import annotate

        try:
            document = annotate(text, args.model, source_id=args.source_id)
        except ToolkitUnavailable as exc:
            sys.stderr.write(f"proc2bpmn-annotate: error: {exc}\n")
            return 2
    else:
        document = pipeline.annotate_text(text, source_id=args.source_id)

    sys.stdout.buffer.write(serialize.to_bytes(document))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
