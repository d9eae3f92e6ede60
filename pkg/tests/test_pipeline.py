import pytest

from entlink.errors import InvalidParams, UnknownComponent
from entlink.pipeline import build_pipeline, register_builtins
from entlink.registry import Registry
from entlink.types import Document, merge_config

from .helpers import INTRO_SENTENCE, INTRO_TRUTH, scripted_llm
from .mockserver import MockServer


def base_config(kb_path, **slot_overrides):
    config = {
        "loader": {"name": "text"},
        "ner": {"name": "gazetteer"},
        "candidate_generator": {"name": "bm25"},
        "reranker": {"name": "none"},
        "disambiguator": {"name": "first"},
        "knowledge_base": {"name": "jsonl", "params": {"path": kb_path}},
    }
    config.update(slot_overrides)
    return config


def intro_regex_ner():
    return {
        "name": "regex",
        "params": {"patterns": {"location": "France|Paris", "event": "Olympics"}},
    }


# -- registry -----------------------------------------------------------------

def test_registry_roundtrip(intro_kb_path):
    registry = Registry()
    register_builtins(registry)
    sentinel = object()
    registry.register("ner", "custom", lambda params, ctx: sentinel)
    config = base_config(intro_kb_path, ner={"name": "custom"})
    pipeline = build_pipeline(config, registry=registry)
    assert pipeline.ner is sentinel


def test_reregistration_replaces(intro_kb_path):
    registry = Registry()
    register_builtins(registry)
    first, second = object(), object()
    registry.register("ner", "custom", lambda params, ctx: first)
    registry.register("ner", "custom", lambda params, ctx: second)
    pipeline = build_pipeline(base_config(intro_kb_path, ner={"name": "custom"}), registry=registry)
    assert pipeline.ner is second


def test_unknown_component_names_slot_and_name(intro_kb_path):
    with pytest.raises(UnknownComponent) as exc:
        build_pipeline(base_config(intro_kb_path, ner={"name": "nonexistent"}))
    assert exc.value.slot == "ner"
    assert exc.value.name == "nonexistent"


# -- config -------------------------------------------------------------------

def test_reference_config_resolves_all_six_slots(intro_kb_path):
    config = {
        "loader": {"name": "text"},
        "ner": {"name": "remote", "params": {
            "labels": ["person", "location"], "base_url": "http://127.0.0.1:1"}},
        "candidate_generator": {"name": "bm25"},
        "reranker": {"name": "none"},
        "disambiguator": {"name": "llm", "params": {
            "base_url": "http://127.0.0.1:1", "model": "some-model"}},
        "knowledge_base": {"name": "jsonl", "params": {"path": intro_kb_path}},
    }
    pipeline = build_pipeline(config)
    assert pipeline.loader is not None
    assert pipeline.ner is not None
    assert pipeline.candidate_generator is not None
    assert pipeline.reranker is None  # passthrough cutoff
    assert pipeline.disambiguator is not None
    assert len(pipeline.kb) == 4


def test_cutoff_exceeding_retrieval_depth_rejected(intro_kb_path):
    config = base_config(intro_kb_path)
    config["params"] = {"n_retrieve": 5, "top_k": 10}
    with pytest.raises(InvalidParams):
        build_pipeline(config)


def test_unknown_config_keys_rejected(intro_kb_path):
    config = base_config(intro_kb_path)
    config["things"] = {}
    with pytest.raises(InvalidParams):
        build_pipeline(config)


def test_missing_slot_rejected(intro_kb_path):
    config = base_config(intro_kb_path)
    del config["ner"]
    with pytest.raises(InvalidParams):
        build_pipeline(config)


def test_unknown_component_params_rejected(intro_kb_path):
    config = base_config(intro_kb_path, candidate_generator={"name": "bm25", "params": {"bogus": 1}})
    with pytest.raises(InvalidParams):
        build_pipeline(config)


def test_globals_parsed_from_params_key(intro_kb_path):
    config = base_config(intro_kb_path)
    config["params"] = {"n_retrieve": 50, "top_k": 5, "n_samples": 1}
    pipeline = build_pipeline(config)
    assert (pipeline.config.n_retrieve, pipeline.config.top_k, pipeline.config.n_samples) == (50, 5, 1)


def test_config_defaults_follow_reference_constants(intro_kb_path):
    pipeline = build_pipeline(base_config(intro_kb_path))
    assert pipeline.config.n_retrieve == 100
    assert pipeline.config.top_k == 10
    assert pipeline.config.n_samples == 3


def test_merge_config_partial_override():
    base = {"ner": {"name": "gazetteer"}, "params": {"top_k": 10, "n_retrieve": 100}}
    merged = merge_config(base, {"params": {"top_k": 5}})
    assert merged["params"] == {"top_k": 5, "n_retrieve": 100}
    merged = merge_config(base, {"ner": {"name": "regex", "params": {"patterns": {"a": "b"}}}})
    assert merged["ner"]["name"] == "regex"


# -- running ------------------------------------------------------------------

def test_worked_example_with_scripted_llm(intro_kb_path):
    with MockServer(chat=scripted_llm(INTRO_TRUTH)) as server:
        config = base_config(
            intro_kb_path,
            ner=intro_regex_ner(),
            disambiguator={"name": "llm", "params": {
                "base_url": server.base_url, "model": "mock", "retry_base_s": 0.01}},
        )
        pipeline = build_pipeline(config)
        annotated = pipeline.run_text(INTRO_SENTENCE, doc_id="intro")

    decided = {r.mention.surface: r.decision for r in annotated.results}
    assert decided == {"France": "france", "Paris": "paris_city", "Olympics": None}
    stages = [t.stage for t in annotated.timings]
    assert stages == ["ner", "retrieve", "rerank", "disambiguate"]


def test_empty_document_keeps_all_timings(intro_kb_path):
    pipeline = build_pipeline(base_config(intro_kb_path))
    annotated = pipeline.run_text("", doc_id="empty")
    assert annotated.results == []
    assert [t.stage for t in annotated.timings] == ["ner", "retrieve", "rerank", "disambiguate"]
    assert all(t.elapsed_ms >= 0 for t in annotated.timings)


def test_detection_only_mode(intro_kb_path):
    config = base_config(
        intro_kb_path,
        candidate_generator={"name": "none"},
        disambiguator={"name": "none"},
    )
    pipeline = build_pipeline(config)
    annotated = pipeline.run_text(INTRO_SENTENCE)
    assert [r.mention.surface for r in annotated.results] == ["France", "Paris"]
    for r in annotated.results:
        assert not r.resolved
        assert r.candidates == []
    assert [t.stage for t in annotated.timings] == ["ner"]


def test_candidates_without_disambiguator(intro_kb_path):
    config = base_config(intro_kb_path, disambiguator={"name": "none"})
    pipeline = build_pipeline(config)
    annotated = pipeline.run_text(INTRO_SENTENCE)
    assert all(not r.resolved for r in annotated.results)
    assert all(r.candidates for r in annotated.results)
    assert [t.stage for t in annotated.timings] == ["ner", "retrieve", "rerank"]


def test_decisions_come_from_topk_candidates(intro_kb_path):
    pipeline = build_pipeline(base_config(intro_kb_path))
    annotated = pipeline.run_text(INTRO_SENTENCE)
    for r in annotated.results:
        if r.decision is not None:
            assert r.decision in {c.entity_id for c in r.candidates}
            assert len(r.candidates) <= pipeline.config.top_k


def test_results_sorted_and_nonoverlapping(intro_kb_path):
    pipeline = build_pipeline(base_config(intro_kb_path))
    annotated = pipeline.run_text(INTRO_SENTENCE * 3)
    starts = [r.mention.start for r in annotated.results]
    assert starts == sorted(starts)
    for a, b in zip(annotated.results, annotated.results[1:]):
        assert a.mention.end <= b.mention.start


def test_run_file_adds_load_timing(tmp_path, intro_kb_path):
    doc = tmp_path / "doc.txt"
    doc.write_text(INTRO_SENTENCE, encoding="utf-8")
    pipeline = build_pipeline(base_config(intro_kb_path))
    annotated = pipeline.run_file(str(doc))
    assert len(annotated) == 1
    assert annotated[0].timings[0].stage == "load"
    assert annotated[0].document.doc_id == "doc"


def test_extra_kb_columns_surface_on_decisions(tmp_path):
    kb_path = tmp_path / "kb.jsonl"
    kb_path.write_text(
        '{"id": "f", "label": "France", "description": "Country", "iso": "FR"}\n',
        encoding="utf-8",
    )
    pipeline = build_pipeline(base_config(str(kb_path)))
    annotated = pipeline.run_text("France won.")
    assert annotated.results[0].decision == "f"
    assert annotated.results[0].decision_extra == {"iso": "FR"}


def test_pipeline_determinism_same_document(intro_kb_path):
    pipeline = build_pipeline(base_config(intro_kb_path))
    doc = Document(doc_id="d", text=INTRO_SENTENCE)
    a = pipeline.run(doc)
    b = pipeline.run(doc)
    assert [(r.mention, r.decision, r.confidence) for r in a.results] == [
        (r.mention, r.decision, r.confidence) for r in b.results
    ]
