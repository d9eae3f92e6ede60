#!/usr/bin/env python3
"""Start a scripted mock inference server for local, model-free demos.

Serves /v1/chat/completions, /v1/embeddings, /rerank and /ner on one port.
The chat endpoint picks the candidate whose label shares the most lowercase
tokens with the bracketed mention (NIL when nothing overlaps), which is good
enough to showcase the full pipeline without any real model.

Usage:
    python scripts/run_mock_backends.py --port 8601
"""

import argparse
import os
import re
import sys
import time

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from tests.mockserver import MockServer  # noqa: E402

_MENTION_RE = re.compile(r"^Mention: (.*)$", re.MULTILINE)
_OPTION_RE = re.compile(r"^(\d+)\. (.*)$", re.MULTILINE)


def overlap_chat(payload):
    prompt = payload["messages"][-1]["content"]
    mention = _MENTION_RE.search(prompt)
    mention_tokens = set(mention.group(1).lower().split()) if mention else set()
    best_index, best_overlap, nil_index = None, 0, 1
    for m in _OPTION_RE.finditer(prompt):
        index, rest = int(m.group(1)), m.group(2)
        if rest == "None of the candidates":
            nil_index = index
            continue
        label_tokens = set(rest.split(" — ")[0].lower().replace("(", " ").replace(")", " ").split())
        overlap = len(mention_tokens & label_tokens)
        if overlap > best_overlap:
            best_index, best_overlap = index, overlap
    answer = best_index if best_index is not None else nil_index
    return [str(answer)] * int(payload.get("n", 1))


def token_spans_ner(texts, labels, threshold):
    """Mark every capitalized word as a mention of the first label."""
    out = []
    label = labels[0] if labels else "entity"
    for text in texts:
        spans = []
        for m in re.finditer(r"\b[A-Z][\w-]*\b", text):
            spans.append({"start": m.start(), "end": m.end(), "label": label, "score": 0.9})
        out.append(spans)
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--port", type=int, default=8601)
    args = parser.parse_args()

    server = MockServer(chat=overlap_chat, ner=token_spans_ner, port=args.port)
    server.start()
    print(f"mock inference endpoints ready at {server.base_url}")
    print("  POST /v1/chat/completions | /v1/embeddings | /rerank | /ner")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.stop()


if __name__ == "__main__":
    main()
