import math
import random
import string

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entlink.backends import BackendConfig, HttpBackend
from entlink.errors import IndexNotBuilt, MalformedResponse
from entlink.kb import KBEntity, KnowledgeBase, candidate_text, load_kb
from entlink.retrieval import (
    Bm25Retriever,
    DenseRetriever,
    FuzzyRetriever,
    Query,
    bm25_score,
    bm25_scores_all,
    build_bm25_index,
    embed,
    fuzzy_score,
    levenshtein,
    tokenize,
)
from entlink.types import Mention

from .helpers import INTRO_ENTITIES, bm25_brute_force, levenshtein_matrix
from .mockserver import MockServer


def query_for(surface):
    return Query(mention=Mention(0, len(surface), surface, "entity"), context=surface)


def intro_kb():
    return KnowledgeBase([KBEntity(e["id"], e["label"], e["description"]) for e in INTRO_ENTITIES])


# -- tokenize -----------------------------------------------------------------

def test_tokenize_rules():
    assert tokenize("Paris (city)") == ["paris", "city"]
    assert tokenize("") == []
    assert tokenize("1897 novel by Émile Zola") == ["1897", "novel", "by", "émile", "zola"]


def test_tokenize_underscore_is_separator():
    assert tokenize("foo_bar") == ["foo", "bar"]


# -- bm25 ---------------------------------------------------------------------

def test_bm25_absent_terms_score_zero():
    index = build_bm25_index(["paris city", "france country"])
    assert bm25_score(index, ["olympics"], 0) == 0.0


def test_bm25_single_doc_hand_evaluated():
    # one doc "a b", query == full doc; N=1, every n_t=1, dl=avgdl=2
    index = build_bm25_index(["a b"])
    idf = math.log(1 + (1 - 1 + 0.5) / (1 + 0.5))
    per_term = idf * 1 * (1.2 + 1) / (1 + 1.2 * (1 - 0.75 + 0.75 * 2 / 2))
    expected = 2 * per_term
    assert bm25_score(index, ["a", "b"], 0) == pytest.approx(expected, abs=1e-12)
    assert expected > 0


def test_bm25_intro_kb_france_query():
    kb = intro_kb()
    index = build_bm25_index([candidate_text(e) for e in kb])
    scores = bm25_scores_all(index, ["france"])
    by_id = {e.id: s for e, s in zip(kb.entities, scores)}
    assert by_id["france"] > 0
    assert by_id["france_gall"] > 0
    assert by_id["paris_city"] > 0  # "Capital city of France" mentions the term
    assert by_id["paris_novel"] == 0.0


def random_kb_texts(rng, n_entities):
    vocab = ["".join(rng.choices(string.ascii_lowercase, k=rng.randint(2, 7))) for _ in range(30)]
    texts = []
    for _ in range(n_entities):
        texts.append(" ".join(rng.choices(vocab, k=rng.randint(1, 12))))
    return vocab, texts


def test_bm25_matches_brute_force_on_random_kbs():
    rng = random.Random(7)
    for trial in range(25):
        n = rng.randint(1, 200)
        vocab, texts = random_kb_texts(rng, n)
        index = build_bm25_index(texts)
        for _ in range(4):
            query = rng.choices(vocab, k=rng.randint(1, 5))
            fast = bm25_scores_all(index, query)
            slow = bm25_brute_force(texts, query)
            assert len(fast) == len(slow)
            for a, b in zip(fast, slow):
                assert a == pytest.approx(b, abs=1e-9)
            # identical order under the score-then-file-order tie rule
            fast_order = sorted(range(n), key=lambda i: (-fast[i], i))
            slow_order = sorted(range(n), key=lambda i: (-slow[i], i))
            assert fast_order == slow_order


def test_bm25_single_doc_score_agrees_with_all_scores():
    index = build_bm25_index(["a b c", "b c d", "c d e"])
    for q in (["a"], ["b", "c"], ["e", "a", "z"]):
        all_scores = bm25_scores_all(index, q)
        for i in range(3):
            assert bm25_score(index, q, i) == pytest.approx(all_scores[i], abs=1e-12)


# -- fuzzy --------------------------------------------------------------------

def test_fuzzy_case_insensitive_identity():
    assert fuzzy_score("Paris", "paris") == 1.0


def test_fuzzy_hand_computed():
    assert fuzzy_score("Pariss", "Paris") == pytest.approx(1 - 1 / 6)


def test_fuzzy_empty_cases():
    assert fuzzy_score("", "x") == 0.0
    assert fuzzy_score("", "") == 1.0


@given(st.text(max_size=30), st.text(max_size=30))
def test_fuzzy_symmetric_and_bounded(a, b):
    assert fuzzy_score(a, b) == fuzzy_score(b, a)
    assert 0.0 <= fuzzy_score(a, b) <= 1.0


def test_levenshtein_matches_dp_oracle_bulk():
    rng = random.Random(11)
    alphabet = string.ascii_letters + string.digits + " éüßñ"
    for _ in range(10_000):
        a = "".join(rng.choices(alphabet, k=rng.randint(0, 12)))
        b = "".join(rng.choices(alphabet, k=rng.randint(0, 12)))
        assert levenshtein(a, b) == levenshtein_matrix(a, b)


# -- retriever components -----------------------------------------------------

def test_fuzzy_retrieval_paris_rank1_is_city(intro_kb_path):
    retriever = FuzzyRetriever()
    retriever.build(load_kb(intro_kb_path))
    out = retriever.generate(query_for("Paris"), 100)
    assert out[0].entity_id == "paris_city"
    assert out[0].retrieval_score == pytest.approx(1 - 7 / 12)
    novel = [c for c in out if c.entity_id == "paris_novel"][0]
    assert novel.retrieval_score == pytest.approx(1 - 8 / 13)


def test_truncation_to_corpus_size(intro_kb_path):
    retriever = Bm25Retriever()
    retriever.build(load_kb(intro_kb_path))
    out = retriever.generate(query_for("france"), 100)
    assert len(out) <= 4
    assert [c.rank for c in out] == list(range(1, len(out) + 1))
    scores = [c.retrieval_score for c in out]
    assert scores == sorted(scores, reverse=True)


def test_zero_scores_excluded(intro_kb_path):
    retriever = Bm25Retriever()
    retriever.build(load_kb(intro_kb_path))
    assert retriever.generate(query_for("olympics"), 100) == []


def test_generate_before_build_raises():
    with pytest.raises(IndexNotBuilt):
        Bm25Retriever().generate(query_for("x"), 5)


def test_ranks_contiguous_on_random_queries(intro_kb_path):
    kb = load_kb(intro_kb_path)
    rng = random.Random(3)
    for retriever in (Bm25Retriever(), FuzzyRetriever()):
        retriever.build(kb)
        for _ in range(20):
            surface = "".join(rng.choices(string.ascii_lowercase + " ", k=rng.randint(1, 12))).strip() or "x"
            n = rng.randint(1, 6)
            out = retriever.generate(query_for(surface), n)
            assert len(out) <= n
            assert [c.rank for c in out] == list(range(1, len(out) + 1))
            scores = [c.retrieval_score for c in out]
            assert scores == sorted(scores, reverse=True)


# -- embeddings / dense -------------------------------------------------------

def backend_for(server):
    return HttpBackend(BackendConfig(base_url=server.base_url, model="emb", retry_base_s=0.01))


def test_embed_normalizes():
    with MockServer(embed=lambda texts: [[3.0, 4.0] for _ in texts]) as server:
        vecs = embed(["anything"], backend_for(server))
    assert np.allclose(vecs[0], [0.6, 0.8])


def test_embed_empty_input_sends_nothing():
    with MockServer() as server:
        assert embed([], backend_for(server)) == []
        assert server.request_count == 0


def test_embed_batches_130_texts_into_3_requests():
    with MockServer(embed=lambda texts: [[1.0, float(len(t))] for t in texts]) as server:
        texts = [f"t{i}" for i in range(130)]
        vecs = embed(texts, backend_for(server))
        payloads = server.requests_for("/v1/embeddings")
    assert [len(p["input"]) for p in payloads] == [64, 64, 2]
    assert len(vecs) == 130
    # order preserved even though the mock reverses its data arrays
    expected = [np.array([1.0, float(len(t))]) for t in texts]
    for v, e in zip(vecs, expected):
        assert np.allclose(v, e / np.linalg.norm(e))


def test_embed_dim_mismatch_across_batches():
    def responder(texts):
        dim = 2 if len(texts) == 64 else 3
        return [[1.0] + [0.0] * (dim - 1)] * len(texts)

    with MockServer(embed=responder) as server:
        with pytest.raises(MalformedResponse):
            embed([f"t{i}" for i in range(70)], backend_for(server))


def test_dense_identical_vector_ranks_first(intro_kb_path):
    kb = load_kb(intro_kb_path)
    france_text = "France: Country in Europe"

    def responder(texts):
        return [[1.0, 0.0] if t in (france_text, "France") else [0.0, 1.0] for t in texts]

    with MockServer(embed=responder) as server:
        retriever = DenseRetriever(backend_for(server))
        retriever.build(kb)
        out = retriever.generate(query_for("France"), 100)
    assert out[0].entity_id == "france"
    assert out[0].retrieval_score == pytest.approx(1.0, abs=1e-9)
    assert len(out) == 4  # dense keeps zero/negative scores


def rotation_instance(rng, n, dim):
    """Random unit entity vectors, a query vector, and an orthonormal rotation."""
    vectors = rng.normal(size=(n, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    query = rng.normal(size=dim)
    query /= np.linalg.norm(query)
    rotation = np.linalg.qr(rng.normal(size=(dim, dim)))[0]
    return vectors, query, rotation


def test_dense_ranking_invariant_under_rotation():
    rng = np.random.default_rng(42)
    table: dict = {}
    with MockServer(embed=lambda texts: [table[t] for t in texts]) as server:
        backend = backend_for(server)

        def run_dense(kb, vectors_by_text):
            table.clear()
            table.update(vectors_by_text)
            retriever = DenseRetriever(backend)
            retriever.build(kb)
            return retriever.generate(query_for("query surface"), len(kb))

        for _ in range(100):
            n, dim = int(rng.integers(2, 20)), int(rng.integers(2, 12))
            vectors, query, rotation = rotation_instance(rng, n, dim)
            kb = KnowledgeBase([KBEntity(f"e{i}", f"entity {i}", f"desc {i}") for i in range(n)])
            texts = [candidate_text(e) for e in kb]

            base_table = {t: list(vectors[i]) for i, t in enumerate(texts)}
            base_table["query surface"] = list(query)
            base = run_dense(kb, base_table)

            rot_table = {t: list(vectors[i] @ rotation) for i, t in enumerate(texts)}
            rot_table["query surface"] = list(query @ rotation)
            rotated = run_dense(kb, rot_table)

            assert [c.entity_id for c in base] == [c.entity_id for c in rotated]
            for a, b in zip(base, rotated):
                assert a.retrieval_score == pytest.approx(b.retrieval_score, abs=1e-6)
