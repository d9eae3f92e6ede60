"""Shared fixtures' data and independent oracle implementations.

Oracles here stay deliberately naive (full DP matrices, exhaustive scans) so
they verify the library implementations without sharing code with them.
"""

from __future__ import annotations

import json
import math
import re

INTRO_SENTENCE = "France hosted the Olympics in Paris."

INTRO_ENTITIES = [
    {"id": "paris_city", "label": "Paris (city)", "description": "Capital city of France"},
    {"id": "paris_novel", "label": "Paris (novel)", "description": "1897 novel by Emile Zola"},
    {"id": "france", "label": "France", "description": "Country in Europe"},
    {"id": "france_gall", "label": "France Gall", "description": "French singer"},
]

INTRO_TRUTH = {  # surface -> correct label, None for NIL
    "France": "France",
    "Paris": "Paris (city)",
    "Olympics": None,
}


def write_kb(path, entities=INTRO_ENTITIES):
    with open(path, "w", encoding="utf-8") as f:
        for e in entities:
            f.write(json.dumps(e, ensure_ascii=False) + "\n")
    return str(path)


# -- scripted LLM ------------------------------------------------------------

_MENTION_RE = re.compile(r"^Mention: (.*)$", re.MULTILINE)
_OPTION_RE = re.compile(r"^(\d+)\. (.*)$", re.MULTILINE)


def parse_prompt(prompt: str):
    """Pull (mention, {label: index}, nil_index) out of a disambiguation prompt."""
    mention = _MENTION_RE.search(prompt).group(1)
    options = {}
    nil_index = None
    for m in _OPTION_RE.finditer(prompt):
        index, rest = int(m.group(1)), m.group(2)
        if rest == "None of the candidates":
            nil_index = index
        else:
            options[rest.split(" — ")[0]] = index
    return mention, options, nil_index


def scripted_llm(truth: dict):
    """Chat responder that answers with the index of the correct label.

    truth maps mention surface -> expected label (None selects NIL).
    """

    def responder(payload):
        prompt = payload["messages"][-1]["content"]
        mention, options, nil_index = parse_prompt(prompt)
        expected = truth.get(mention)
        answer = nil_index if expected is None else options[expected]
        return [str(answer)] * int(payload.get("n", 1))

    return responder


# -- oracles -----------------------------------------------------------------

def levenshtein_matrix(a: str, b: str) -> int:
    """Full-matrix DP edit distance."""
    rows, cols = len(a) + 1, len(b) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[-1][-1]


def bm25_brute_force(entity_texts: list[str], query_tokens: list[str],
                     k1: float = 1.2, b: float = 0.75) -> list[float]:
    """Score every entity directly from the formula, no inverted index."""

    def toks(s):
        return re.findall(r"[^\W_]+", s.lower(), re.UNICODE)

    docs = [toks(t) for t in entity_texts]
    n_docs = len(docs)
    avgdl = sum(len(d) for d in docs) / n_docs if n_docs else 0.0
    scores = []
    for doc in docs:
        score = 0.0
        for term in query_tokens:
            tf = doc.count(term)
            if tf == 0:
                continue
            n_t = sum(1 for d in docs if term in d)
            idf = math.log(1.0 + (n_docs - n_t + 0.5) / (n_t + 0.5))
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len(doc) / avgdl))
        scores.append(score)
    return scores


def merge_oracle(mentions):
    """Greedy overlap resolution re-stated from the documented rules."""
    dedup = {}
    for m in mentions:
        key = (m.start, m.end, m.label)
        if key not in dedup or m.score > dedup[key].score:
            dedup[key] = m
    remaining = list(dedup.values())
    accepted = []
    while remaining:
        best = None
        for m in remaining:
            if best is None:
                best = m
                continue
            a = (m.end - m.start, m.score, -m.start, [-ord(c) for c in m.label])
            bkey = (best.end - best.start, best.score, -best.start, [-ord(c) for c in best.label])
            if a > bkey:
                best = m
        remaining.remove(best)
        if all(best.end <= x.start or best.start >= x.end for x in accepted):
            accepted.append(best)
    return sorted(accepted, key=lambda m: (m.start, m.end, m.label))


def gazetteer_brute_force(text: str, labels: list[str]):
    """O(n * |KB|) whole-word scan; longest label wins at each position."""
    lower = text.lower()
    spans = []
    pos = 0
    while pos < len(text):
        best_end = None
        for label in labels:
            ll = label.lower()
            if not ll:
                continue
            if lower.startswith(ll, pos):
                end = pos + len(ll)
                before_ok = pos == 0 or not _is_word(text[pos - 1])
                after_ok = end == len(text) or not _is_word(text[end])
                if before_ok and after_ok and (best_end is None or end > best_end):
                    best_end = end
        if best_end is not None:
            spans.append((pos, best_end))
            pos = best_end
        else:
            pos += 1
    return spans


def _is_word(ch: str) -> bool:
    return ch.isalnum() or ch == "_"
