"""Candidate generation: BM25 over an inverted index, normalized-Levenshtein
fuzzy matching on labels, and exact-search dense retrieval via a remote
embeddings endpoint.

Queries are the mention surface alone; the surrounding context rides along in
Query for retrievers that want it. All retrievers rank score-descending with
ties broken by KB file order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .backends import HttpBackend
from .errors import IndexNotBuilt, InvalidParams, MalformedResponse
from .kb import KBEntity, KnowledgeBase, candidate_text
from .types import Candidate, Mention

EMBED_BATCH_SIZE = 64

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class Query:
    mention: Mention
    context: str = ""
    mention_offset: int = 0  # offset of the surface inside context


def tokenize(s: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character; no stemming."""
    return _TOKEN_RE.findall(s.lower())


@dataclass
class Bm25Index:
    """Inverted index over entity texts with Okapi parameters.

    IDF uses the non-negative ln(1 + (N - n_t + 0.5)/(n_t + 0.5)) form, which
    avoids negative scores on tiny KBs.
    """

    postings: dict[str, list[tuple[int, int]]] = field(default_factory=dict)
    doc_len: list[int] = field(default_factory=list)
    avgdl: float = 0.0
    n_docs: int = 0
    k1: float = 1.2
    b: float = 0.75

    def idf(self, term: str) -> float:
        n_t = len(self.postings.get(term, ()))
        if n_t == 0:
            return 0.0
        return math.log(1.0 + (self.n_docs - n_t + 0.5) / (n_t + 0.5))


def build_bm25_index(texts: list[str], k1: float = 1.2, b: float = 0.75) -> Bm25Index:
    index = Bm25Index(k1=k1, b=b, n_docs=len(texts))
    for doc_idx, text in enumerate(texts):
        tokens = tokenize(text)
        index.doc_len.append(len(tokens))
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for term, tf in counts.items():
            index.postings.setdefault(term, []).append((doc_idx, tf))
    index.avgdl = sum(index.doc_len) / index.n_docs if index.n_docs else 0.0
    return index


def bm25_score(index: Bm25Index, query_tokens: list[str], entity_index: int) -> float:
    """Okapi BM25 score of one entity text for the given query tokens."""
    score = 0.0
    dl = index.doc_len[entity_index]
    norm = index.k1 * (1.0 - index.b + index.b * dl / index.avgdl) if index.avgdl else index.k1
    for term in query_tokens:
        tf = 0
        for doc_idx, f in index.postings.get(term, ()):
            if doc_idx == entity_index:
                tf = f
                break
        if tf == 0:
            continue
        score += index.idf(term) * tf * (index.k1 + 1.0) / (tf + norm)
    return score


def bm25_scores_all(index: Bm25Index, query_tokens: list[str]) -> list[float]:
    """Score every entity at once by walking postings lists."""
    scores = [0.0] * index.n_docs
    for term in query_tokens:
        postings = index.postings.get(term)
        if not postings:
            continue
        idf = index.idf(term)
        for doc_idx, tf in postings:
            dl = index.doc_len[doc_idx]
            norm = index.k1 * (1.0 - index.b + index.b * dl / index.avgdl)
            scores[doc_idx] += idf * tf * (index.k1 + 1.0) / (tf + norm)
    return scores


def levenshtein(a: str, b: str) -> int:
    """Edit distance, two-row DP."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def fuzzy_score(a: str, b: str) -> float:
    """Normalized case-insensitive similarity in [0, 1]; both empty -> 1.0."""
    la, lb = a.lower(), b.lower()
    if not la and not lb:
        return 1.0
    return 1.0 - levenshtein(la, lb) / max(len(la), len(lb))


@dataclass
class DenseIndex:
    vectors: np.ndarray  # (n_entities, dim), unit rows
    dim: int


def _l2_normalize(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return matrix / norms


def embed(texts: list[str], backend: HttpBackend) -> list[np.ndarray]:
    """Fetch embeddings in batches of 64 and L2-normalize locally.

    Response items may arrive unordered; they are reordered by "index".
    """
    if not texts:
        return []
    vectors: list[np.ndarray] = []
    dim: int | None = None
    for batch_start in range(0, len(texts), EMBED_BATCH_SIZE):
        batch = texts[batch_start : batch_start + EMBED_BATCH_SIZE]
        payload = {"model": backend.cfg.model, "input": batch}
        resp = backend.post_json("/v1/embeddings", payload, kind="embeddings")
        data = resp.get("data")
        if not isinstance(data, list) or len(data) != len(batch):
            raise MalformedResponse(
                f"embeddings endpoint returned {len(data) if isinstance(data, list) else 'no'} "
                f"items for a batch of {len(batch)}"
            )
        by_index = sorted(data, key=lambda item: item.get("index", 0))
        for item in by_index:
            vec = np.asarray(item.get("embedding"), dtype=np.float64)
            if vec.ndim != 1 or vec.size == 0:
                raise MalformedResponse("embedding item is not a flat vector")
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise MalformedResponse(
                    f"embedding dimension mismatch across batches: {vec.size} != {dim}"
                )
            norm = float(np.linalg.norm(vec))
            vectors.append(vec / norm if norm > 0 else vec)
    return vectors


def build_dense_index(texts: list[str], backend: HttpBackend) -> DenseIndex:
    vecs = embed(texts, backend)
    if not vecs:
        return DenseIndex(vectors=np.zeros((0, 1)), dim=1)
    matrix = _l2_normalize(np.vstack(vecs))
    return DenseIndex(vectors=matrix, dim=matrix.shape[1])


def _top_candidates(
    kb: KnowledgeBase, scores, n: int, drop_zero: bool
) -> list[Candidate]:
    order = sorted(range(len(kb)), key=lambda i: (-scores[i], i))
    out: list[Candidate] = []
    for idx in order:
        if len(out) >= n:
            break
        if drop_zero and scores[idx] <= 0.0:
            break  # scores sorted descending; nothing positive remains
        e: KBEntity = kb.entities[idx]
        out.append(
            Candidate(
                entity_id=e.id,
                label=e.label,
                description=e.description,
                retrieval_score=float(scores[idx]),
                rank=len(out) + 1,
            )
        )
    return out


class Bm25Retriever:
    """BM25 of the mention surface against each entity's "label: description"."""

    def __init__(self, k1: float = 1.2, b: float = 0.75):
        self.k1 = k1
        self.b = b
        self.kb: KnowledgeBase | None = None
        self.index: Bm25Index | None = None

    def build(self, kb: KnowledgeBase):
        self.kb = kb
        self.index = build_bm25_index([candidate_text(e) for e in kb], k1=self.k1, b=self.b)

    def generate(self, query: Query, n: int) -> list[Candidate]:
        if self.index is None or self.kb is None:
            raise IndexNotBuilt("bm25 index not built")
        if n < 1:
            raise InvalidParams(f"n must be >= 1, got {n}")
        scores = bm25_scores_all(self.index, tokenize(query.mention.surface))
        return _top_candidates(self.kb, scores, n, drop_zero=True)


class FuzzyRetriever:
    """Normalized Levenshtein similarity of the surface against entity labels."""

    def __init__(self):
        self.kb: KnowledgeBase | None = None

    def build(self, kb: KnowledgeBase):
        self.kb = kb

    def generate(self, query: Query, n: int) -> list[Candidate]:
        if self.kb is None:
            raise IndexNotBuilt("fuzzy retriever has no KB")
        if n < 1:
            raise InvalidParams(f"n must be >= 1, got {n}")
        surface = query.mention.surface
        scores = [fuzzy_score(surface, e.label) for e in self.kb]
        return _top_candidates(self.kb, scores, n, drop_zero=True)


class DenseRetriever:
    """Exact dot-product search over remotely embedded entity texts."""

    def __init__(self, backend: HttpBackend):
        self.backend = backend
        self.kb: KnowledgeBase | None = None
        self.index: DenseIndex | None = None

    def build(self, kb: KnowledgeBase):
        self.kb = kb
        self.index = build_dense_index([candidate_text(e) for e in kb], self.backend)

    def generate(self, query: Query, n: int) -> list[Candidate]:
        if self.index is None or self.kb is None:
            raise IndexNotBuilt("dense index not built")
        if n < 1:
            raise InvalidParams(f"n must be >= 1, got {n}")
        if len(self.kb) == 0:
            return []
        qvecs = embed([query.mention.surface], self.backend)
        if len(qvecs) != 1 or qvecs[0].size != self.index.dim:
            raise MalformedResponse("query embedding missing or of wrong dimension")
        scores = self.index.vectors @ qvecs[0]
        return _top_candidates(self.kb, scores, n, drop_zero=False)
