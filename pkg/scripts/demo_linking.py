#!/usr/bin/env python3
"""End-to-end demo with no model server: gazetteer + BM25 + mock LLM.

Builds a tiny knowledge base, links a sample text against it, and prints the
decisions with per-stage timings.
"""

import json
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from tests.mockserver import MockServer  # noqa: E402
from scripts.run_mock_backends import overlap_chat  # noqa: E402

from entlink import build_pipeline  # noqa: E402

KB = [
    {"id": "paris_city", "label": "Paris (city)", "description": "Capital city of France"},
    {"id": "paris_novel", "label": "Paris (novel)", "description": "1897 novel by Emile Zola"},
    {"id": "france", "label": "France", "description": "Country in Europe"},
    {"id": "france_gall", "label": "France Gall", "description": "French singer"},
]

TEXT = "France hosted the Olympics in Paris."


def main():
    with tempfile.TemporaryDirectory() as tmp:
        kb_path = os.path.join(tmp, "kb.jsonl")
        with open(kb_path, "w", encoding="utf-8") as f:
            for row in KB:
                f.write(json.dumps(row) + "\n")

        with MockServer(chat=overlap_chat) as server:
            pipeline = build_pipeline({
                "loader": {"name": "text"},
                "ner": {"name": "gazetteer"},
                "candidate_generator": {"name": "bm25"},
                "reranker": {"name": "none"},
                "disambiguator": {"name": "llm", "params": {
                    "base_url": server.base_url, "model": "demo-llm"}},
                "knowledge_base": {"name": "jsonl", "params": {"path": kb_path}},
            })
            annotated = pipeline.run_text(TEXT, doc_id="demo")

        print(f"text: {TEXT}\n")
        for r in annotated.results:
            entity = r.decision if r.decision is not None else "NIL"
            print(f"  [{r.mention.start:>3},{r.mention.end:>3}) {r.mention.surface!r:16} -> "
                  f"{entity}  (confidence {r.confidence:.2f})")
        print("\ntimings:")
        for t in annotated.timings:
            print(f"  {t.stage:<12} {t.elapsed_ms:8.2f} ms")


if __name__ == "__main__":
    main()
