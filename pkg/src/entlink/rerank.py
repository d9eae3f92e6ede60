"""Optional stage 3: rescore retrieved candidates, then cut to top-k.

The remote scorer sees (bracketed-mention context, candidate text) pairs,
mirroring how stage 4 presents the mention. The stage is best-effort: if the
scoring service stays unreachable, the retrieval order passes through with a
warning rather than failing the document.
"""

from __future__ import annotations

import logging
from dataclasses import replace

from .backends import HttpBackend
from .disambiguate import bracket_span
from .errors import ApiError, MalformedResponse, TransportError
from .kb import KBEntity, candidate_text
from .retrieval import Query
from .types import Candidate

logger = logging.getLogger(__name__)

RERANK_BATCH_SIZE = 32


def cutoff(candidates: list[Candidate], k: int) -> list[Candidate]:
    """First min(k, len) candidates with ranks reassigned from 1."""
    return [replace(c, rank=i + 1) for i, c in enumerate(candidates[:k])]


def _pair_doc(c: Candidate) -> str:
    return candidate_text(KBEntity(id=c.entity_id, label=c.label, description=c.description))


def rerank_remote(
    query: Query, candidates: list[Candidate], backend: HttpBackend
) -> list[Candidate]:
    """Score all candidates against the query and re-sort descending.

    Wire format: POST /rerank {"model","query","documents":[...]} ->
    {"scores":[...]} aligned by index; requests are batched at 32 documents.
    Ties keep the prior (retrieval) rank order.
    """
    if not candidates:
        return []
    query_text = bracket_span(
        query.context,
        query.mention_offset,
        query.mention_offset + len(query.mention.surface),
    )
    documents = [_pair_doc(c) for c in candidates]
    scores: list[float] = []
    try:
        for batch_start in range(0, len(documents), RERANK_BATCH_SIZE):
            batch = documents[batch_start : batch_start + RERANK_BATCH_SIZE]
            payload = {"model": backend.cfg.model, "query": query_text, "documents": batch}
            resp = backend.post_json("/rerank", payload, kind="rerank")
            batch_scores = resp.get("scores")
            if not isinstance(batch_scores, list) or len(batch_scores) != len(batch):
                raise MalformedResponse(
                    f"rerank endpoint returned {len(batch_scores) if isinstance(batch_scores, list) else 'no'} "
                    f"scores for {len(batch)} documents"
                )
            scores.extend(float(s) for s in batch_scores)
    except (TransportError, ApiError, MalformedResponse) as e:
        logger.warning("reranker unavailable (%s); keeping retrieval order", e)
        return [replace(c) for c in candidates]
    rescored = [replace(c, rerank_score=s) for c, s in zip(candidates, scores)]
    rescored.sort(key=lambda c: (-c.rerank_score, c.rank))
    return [replace(c, rank=i + 1) for i, c in enumerate(rescored)]


class RemoteReranker:
    def __init__(self, backend: HttpBackend):
        self.backend = backend

    def rerank(self, query: Query, candidates: list[Candidate]) -> list[Candidate]:
        return rerank_remote(query, candidates, self.backend)
