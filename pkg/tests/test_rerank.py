from entlink.backends import BackendConfig, HttpBackend
from entlink.rerank import RERANK_BATCH_SIZE, cutoff, rerank_remote
from entlink.retrieval import Query
from entlink.types import Candidate, Mention

from .mockserver import MockServer


def make_candidates(n):
    return [
        Candidate(entity_id=f"e{i}", label=f"L{i}", description=f"d{i}",
                  retrieval_score=float(n - i), rank=i + 1)
        for i in range(n)
    ]


def make_query(surface="France", context="France hosted the Olympics"):
    start = context.index(surface)
    return Query(
        mention=Mention(start, start + len(surface), surface, "entity"),
        context=context,
        mention_offset=start,
    )


def backend_for(server):
    return HttpBackend(BackendConfig(base_url=server.base_url, model="rr",
                                     retry_base_s=0.01, max_retries=1))


def test_cutoff_100_to_10():
    out = cutoff(make_candidates(100), 10)
    assert len(out) == 10
    assert [c.rank for c in out] == list(range(1, 11))
    assert [c.entity_id for c in out] == [f"e{i}" for i in range(10)]


def test_cutoff_short_list():
    out = cutoff(make_candidates(4), 10)
    assert len(out) == 4


def test_cutoff_k1():
    out = cutoff(make_candidates(4), 1)
    assert [c.entity_id for c in out] == ["e0"]


def test_cutoff_does_not_mutate_input():
    candidates = make_candidates(5)
    cutoff(candidates, 2)
    assert [c.rank for c in candidates] == [1, 2, 3, 4, 5]


def test_rerank_reverses_retrieval_order():
    def responder(query, docs):
        return list(range(len(docs)))  # later docs score higher -> reversed

    with MockServer(rerank=responder) as server:
        candidates = make_candidates(5)
        out = rerank_remote(make_query(), candidates, backend_for(server))
    assert [c.entity_id for c in out] == ["e4", "e3", "e2", "e1", "e0"]
    assert all(c.rerank_score is not None for c in out)
    assert [c.rank for c in out] == [1, 2, 3, 4, 5]
    # retrieval scores travel along untouched
    assert {c.entity_id: c.retrieval_score for c in out} == {
        c.entity_id: c.retrieval_score for c in candidates
    }


def test_rerank_constant_scores_keep_order():
    with MockServer(rerank=lambda q, docs: [0.5] * len(docs)) as server:
        out = rerank_remote(make_query(), make_candidates(6), backend_for(server))
    assert [c.entity_id for c in out] == [f"e{i}" for i in range(6)]


def test_rerank_query_has_bracketed_mention():
    with MockServer(rerank=lambda q, docs: [0.0] * len(docs)) as server:
        rerank_remote(make_query(), make_candidates(2), backend_for(server))
        payload = server.requests_for("/rerank")[0]
    assert payload["query"] == "[France] hosted the Olympics"
    assert payload["documents"] == ["L0: d0", "L1: d1"]


def test_rerank_batches_at_32():
    with MockServer(rerank=lambda q, docs: [0.0] * len(docs)) as server:
        rerank_remote(make_query(), make_candidates(70), backend_for(server))
        payloads = server.requests_for("/rerank")
    assert [len(p["documents"]) for p in payloads] == [32, 32, 6]
    assert RERANK_BATCH_SIZE == 32


def test_rerank_persistent_failure_falls_back_to_input_order(caplog):
    with MockServer() as server:
        server.force_status(500, times=10)
        out = rerank_remote(make_query(), make_candidates(4), backend_for(server))
    assert [c.entity_id for c in out] == ["e0", "e1", "e2", "e3"]
    assert all(c.rerank_score is None for c in out)


def test_rerank_then_cutoff_subset_of_input():
    def responder(query, docs):
        return [hash(d) % 97 / 97 for d in docs]

    with MockServer(rerank=responder) as server:
        candidates = make_candidates(20)
        out = cutoff(rerank_remote(make_query(), candidates, backend_for(server)), 5)
    assert len(out) == 5
    assert {c.entity_id for c in out} <= {c.entity_id for c in candidates}


def test_rerank_empty_candidates_no_request():
    with MockServer() as server:
        assert rerank_remote(make_query(), [], backend_for(server)) == []
        assert server.request_count == 0
