"""Pipeline assembly and execution: NER -> candidates -> rerank -> disambiguate.

build_pipeline resolves the six config slots against the registry, loads and
indexes the KB once, and returns an immutable Pipeline. run() may be called
concurrently on distinct documents; stages within one document run in order.
"""

from __future__ import annotations

import logging
import time

from . import chunking
from .backends import BackendConfig, HttpBackend, ResponseCache
from .chunking import merge_mentions
from .disambiguate import DEFAULT_CTX_WINDOW, FirstDisambiguator, LlmDisambiguator
from .errors import EntlinkError, InvalidParams, StageError
from .kb import KBEntity, KnowledgeBase, load_kb
from .loaders import FileLoader
from .ner import GazetteerNer, NerParams, RegexNer, RemoteNer
from .registry import BuildContext, Registry, default_registry
from .rerank import RemoteReranker, cutoff
from .retrieval import Bm25Retriever, DenseRetriever, FuzzyRetriever, Query
from .types import (
    AnnotatedDocument,
    Document,
    LinkResult,
    PipelineConfig,
    StageTiming,
)

logger = logging.getLogger(__name__)


class Pipeline:
    """A built pipeline. Treat as immutable; safe to share across threads."""

    def __init__(
        self,
        config: PipelineConfig,
        loader,
        ner,
        candidate_generator,
        reranker,
        disambiguator,
        kb: KnowledgeBase,
    ):
        self.config = config
        self.loader = loader
        self.ner = ner
        self.candidate_generator = candidate_generator
        self.reranker = reranker
        self.disambiguator = disambiguator
        self.kb = kb

    def run(self, document: Document) -> AnnotatedDocument:
        """Run all enabled stages on one document."""
        timings: list[StageTiming] = []
        text = document.text

        t0 = time.perf_counter()
        try:
            chunks = chunking.chunk(text, self.ner.params.window, self.ner.params.overlap)
            mentions = merge_mentions(self.ner.detect(chunks, text))
            for m in mentions:
                m.validate(text)
        except (EntlinkError, ValueError) as e:
            raise StageError("ner", e) from e
        timings.append(StageTiming("ner", (time.perf_counter() - t0) * 1000.0))

        if self.candidate_generator is None:
            results = [
                LinkResult(mention=m, resolved=False, confidence=0.0) for m in mentions
            ]
            return AnnotatedDocument(document=document, results=results, timings=timings)

        t0 = time.perf_counter()
        queries = []
        candidate_lists = []
        for m in mentions:
            query = _make_query(document, m)
            queries.append(query)
            try:
                candidate_lists.append(
                    self.candidate_generator.generate(query, self.config.n_retrieve)
                )
            except EntlinkError as e:
                raise StageError("retrieve", e, mention=m) from e
        timings.append(StageTiming("retrieve", (time.perf_counter() - t0) * 1000.0))

        t0 = time.perf_counter()
        for i, (query, cands) in enumerate(zip(queries, candidate_lists)):
            try:
                if self.reranker is not None:
                    cands = self.reranker.rerank(query, cands)
                candidate_lists[i] = cutoff(cands, self.config.top_k)
            except EntlinkError as e:
                raise StageError("rerank", e, mention=query.mention) from e
        timings.append(StageTiming("rerank", (time.perf_counter() - t0) * 1000.0))

        if self.disambiguator is None:
            results = [
                LinkResult(mention=m, candidates=cands, resolved=False, confidence=0.0)
                for m, cands in zip(mentions, candidate_lists)
            ]
            return AnnotatedDocument(document=document, results=results, timings=timings)

        t0 = time.perf_counter()
        results = []
        for m, cands in zip(mentions, candidate_lists):
            try:
                result = self.disambiguator.resolve(document, m, cands)
            except EntlinkError as e:
                raise StageError("disambiguate", e, mention=m) from e
            if result.decision is not None:
                entity = self.kb.get(result.decision)
                if entity is not None and entity.extra:
                    result.decision_extra = dict(entity.extra)
            results.append(result)
        timings.append(StageTiming("disambiguate", (time.perf_counter() - t0) * 1000.0))

        return AnnotatedDocument(document=document, results=results, timings=timings)

    def run_text(self, text: str, doc_id: str = "inline") -> AnnotatedDocument:
        return self.run(Document(doc_id=doc_id, text=text))

    def run_file(self, path: str) -> list[AnnotatedDocument]:
        """Load one input file (may expand to several documents) and run each."""
        t0 = time.perf_counter()
        documents = self.loader.load_path(path)
        load_ms = (time.perf_counter() - t0) * 1000.0
        out = []
        for doc in documents:
            annotated = self.run(doc)
            annotated.timings.insert(0, StageTiming("load", load_ms))
            out.append(annotated)
        return out


def _make_query(document: Document, mention, context_chars: int = DEFAULT_CTX_WINDOW) -> Query:
    lo = max(0, mention.start - context_chars)
    hi = min(len(document.text), mention.end + context_chars)
    return Query(
        mention=mention,
        context=document.text[lo:hi],
        mention_offset=mention.start - lo,
    )


# --- built-in component factories -------------------------------------------

_BACKEND_KEYS = {"base_url", "model", "api_key", "timeout", "max_retries", "max_in_flight", "retry_base_s", "cache_sampled"}


def _check_params(slot: str, name: str, params: dict, allowed: set):
    unknown = set(params) - allowed
    if unknown:
        raise InvalidParams(f"{slot}/{name}: unknown params {sorted(unknown)}")


def _backend_from_params(params: dict, ctx: BuildContext, what: str) -> HttpBackend:
    base_url = params.get("base_url")
    if not base_url:
        raise InvalidParams(f"{what} needs a base_url param")
    kwargs = {k: params[k] for k in _BACKEND_KEYS if k in params}
    cfg = BackendConfig(**kwargs)
    cache = ctx.extras.get("response_cache")
    return HttpBackend(cfg, cache=cache)


def _make_loader(name: str):
    def factory(params: dict, ctx: BuildContext):
        _check_params("loader", name, params, {"text_field"})
        fmt = None if name == "auto" else name
        return FileLoader(format=fmt, text_field=params.get("text_field", "text"))

    return factory


def _ner_params(params: dict) -> NerParams:
    ner_params = NerParams(
        labels=list(params.get("labels", [])),
        threshold=float(params.get("threshold", 0.5)),
        patterns=params.get("patterns"),
        window=int(params.get("window", chunking.DEFAULT_WINDOW)),
        overlap=int(params.get("overlap", chunking.DEFAULT_OVERLAP)),
    )
    chunking.chunk("x", ner_params.window, ner_params.overlap)  # fail bad windows at build time
    return ner_params


def _regex_ner_factory(params: dict, ctx: BuildContext):
    _check_params("ner", "regex", params, {"patterns", "window", "overlap"})
    if not isinstance(params.get("patterns"), dict) or not params["patterns"]:
        raise InvalidParams("ner/regex needs a non-empty patterns map (label -> regex)")
    return RegexNer(_ner_params(params))


def _gazetteer_ner_factory(params: dict, ctx: BuildContext):
    _check_params("ner", "gazetteer", params, {"window", "overlap"})
    return GazetteerNer(ctx.kb, _ner_params(params))


def _remote_ner_factory(params: dict, ctx: BuildContext):
    _check_params("ner", "remote", params, _BACKEND_KEYS | {"labels", "threshold", "window", "overlap"})
    ner_params = _ner_params(params)
    if not ner_params.labels:
        raise InvalidParams("ner/remote needs a non-empty labels list")
    return RemoteNer(ner_params, _backend_from_params(params, ctx, "ner/remote"))


def _bm25_factory(params: dict, ctx: BuildContext):
    _check_params("candidate_generator", "bm25", params, {"k1", "b"})
    return Bm25Retriever(k1=float(params.get("k1", 1.2)), b=float(params.get("b", 0.75)))


def _fuzzy_factory(params: dict, ctx: BuildContext):
    _check_params("candidate_generator", "fuzzy", params, set())
    return FuzzyRetriever()


def _dense_factory(params: dict, ctx: BuildContext):
    _check_params("candidate_generator", "dense", params, _BACKEND_KEYS)
    return DenseRetriever(_backend_from_params(params, ctx, "candidate_generator/dense"))


def _none_factory(params: dict, ctx: BuildContext):
    return None


def _remote_reranker_factory(params: dict, ctx: BuildContext):
    _check_params("reranker", "remote", params, _BACKEND_KEYS)
    return RemoteReranker(_backend_from_params(params, ctx, "reranker/remote"))


def _llm_disambiguator_factory(params: dict, ctx: BuildContext):
    _check_params(
        "disambiguator", "llm", params, _BACKEND_KEYS | {"temperature", "ctx_window"}
    )
    backend = _backend_from_params(params, ctx, "disambiguator/llm")
    return LlmDisambiguator(
        backend,
        n_samples=ctx.config.n_samples,
        temperature=params.get("temperature"),
        ctx_window=int(params.get("ctx_window", DEFAULT_CTX_WINDOW)),
    )


def _first_disambiguator_factory(params: dict, ctx: BuildContext):
    _check_params("disambiguator", "first", params, set())
    return FirstDisambiguator()


def _jsonl_kb_factory(params: dict, ctx: BuildContext):
    _check_params("knowledge_base", "jsonl", params, {"path"})
    path = params.get("path")
    if not path:
        raise InvalidParams("knowledge_base/jsonl needs a path param")
    return load_kb(path)


def _inline_kb_factory(params: dict, ctx: BuildContext):
    _check_params("knowledge_base", "inline", params, {"entities"})
    raw = params.get("entities")
    if not isinstance(raw, list):
        raise InvalidParams("knowledge_base/inline needs an entities list")
    entities = []
    for obj in raw:
        entities.append(
            KBEntity(
                id=obj["id"],
                label=obj["label"],
                description=obj.get("description", ""),
                extra={k: v for k, v in obj.items() if k not in ("id", "label", "description")},
            )
        )
    return KnowledgeBase(entities)


def register_builtins(registry: Registry):
    for name in ("auto", "text", "html", "json", "jsonl", "markdown"):
        registry.register("loader", name, _make_loader(name))
    registry.register("ner", "regex", _regex_ner_factory)
    registry.register("ner", "gazetteer", _gazetteer_ner_factory)
    registry.register("ner", "remote", _remote_ner_factory)
    registry.register("candidate_generator", "bm25", _bm25_factory)
    registry.register("candidate_generator", "fuzzy", _fuzzy_factory)
    registry.register("candidate_generator", "dense", _dense_factory)
    registry.register("candidate_generator", "none", _none_factory)
    registry.register("reranker", "none", _none_factory)
    registry.register("reranker", "remote", _remote_reranker_factory)
    registry.register("disambiguator", "llm", _llm_disambiguator_factory)
    registry.register("disambiguator", "first", _first_disambiguator_factory)
    registry.register("disambiguator", "none", _none_factory)
    registry.register("knowledge_base", "jsonl", _jsonl_kb_factory)
    registry.register("knowledge_base", "inline", _inline_kb_factory)


register_builtins(default_registry)


def build_pipeline(
    config: PipelineConfig | dict,
    registry: Registry | None = None,
    cache_dir: str | None = None,
    prebuilt: dict | None = None,
) -> Pipeline:
    """Resolve the config, construct all components, index the KB, and return
    a ready Pipeline.

    prebuilt may inject already-constructed components by slot name (used by
    the HTTP service to reuse cached retrieval indexes).
    """
    registry = registry or default_registry
    cfg = PipelineConfig.from_dict(config) if isinstance(config, dict) else config
    cfg.validate()
    prebuilt = prebuilt or {}
    ctx = BuildContext(config=cfg, cache_dir=cache_dir)
    if cache_dir:
        ctx.extras["response_cache"] = ResponseCache(cache_dir)

    def construct(slot: str):
        if slot in prebuilt:
            return prebuilt[slot]
        spec = cfg.spec_for(slot)
        factory = registry.resolve(slot, spec.name)
        return factory(dict(spec.params), ctx)

    kb = construct("knowledge_base")
    ctx.kb = kb
    loader = construct("loader")
    ner = construct("ner")
    candidate_generator = construct("candidate_generator")
    reranker = construct("reranker")
    disambiguator = construct("disambiguator")

    if candidate_generator is not None and "candidate_generator" not in prebuilt:
        candidate_generator.build(kb)

    return Pipeline(
        config=cfg,
        loader=loader,
        ner=ner,
        candidate_generator=candidate_generator,
        reranker=reranker,
        disambiguator=disambiguator,
        kb=kb,
    )
