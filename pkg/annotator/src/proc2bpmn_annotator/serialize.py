"""Canonical serialization of the annotation interchange JSON.

The byte layout (2-space indent, UTF-8, trailing newline, fixed key order)
matches the compiler's own serializer so frozen fixtures regenerate
identically.
"""

from __future__ import annotations

import json


def to_bytes(document: dict) -> bytes:
    payload = {
        "source_id": document.get("source_id", ""),
        "sentences": [
            [
                {
                    "index": t["index"],
                    "form": t["form"],
                    "lemma": t["lemma"],
                    "upos": t["upos"],
                    "head": t["head"],
                    "deprel": t["deprel"],
                }
                for t in sentence
            ]
            for sentence in document["sentences"]
        ],
        "entities": [
            {"sentence": e["sentence"], "start": e["start"], "end": e["end"], "label": e["label"]}
            for e in document.get("entities", [])
        ],
        "chains": [
            {"mentions": [{"sentence": m["sentence"], "start": m["start"], "end": m["end"]}
                          for m in c["mentions"]]}
            for c in document.get("chains", [])
        ],
    }
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
