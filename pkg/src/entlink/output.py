"""JSONL serialization of annotated documents (shared by CLI and service).

One JSON object per document, stable key order, NIL serialized as null.
Mentions from a detection-only run (no disambiguation stage) omit the
entity_id/confidence keys entirely.
"""

from __future__ import annotations

import json

from .types import AnnotatedDocument, LinkResult


def result_to_dict(result: LinkResult) -> dict:
    out: dict = {
        "start": result.mention.start,
        "end": result.mention.end,
        "surface": result.mention.surface,
        "label": result.mention.label,
    }
    if result.resolved:
        out["entity_id"] = result.decision
        out["confidence"] = result.confidence
        if result.decision is not None:
            chosen = next((c for c in result.candidates if c.entity_id == result.decision), None)
            if chosen is not None:
                out["entity"] = {
                    "id": chosen.entity_id,
                    "label": chosen.label,
                    "description": chosen.description,
                }
        if result.decision_extra:
            out["entity_extra"] = result.decision_extra
    out["candidates"] = [
        {"id": c.entity_id, "rank": c.rank, "score": c.governing_score}
        for c in result.candidates
    ]
    return out


def annotated_to_dict(annotated: AnnotatedDocument, include_timings: bool = True) -> dict:
    out: dict = {
        "doc_id": annotated.document.doc_id,
        "mentions": [result_to_dict(r) for r in annotated.results],
    }
    if include_timings:
        out["timings_ms"] = annotated.timings_ms()
    return out


def error_record(doc_id: str, error: Exception) -> dict:
    return {"doc_id": doc_id, "error": str(error)}


def write_line(record: dict, sink):
    sink.write(json.dumps(record, ensure_ascii=False) + "\n")


def parse_line(line: str) -> dict:
    return json.loads(line)
