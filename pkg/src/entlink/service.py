"""HTTP API over the pipeline, consumed by the web UI.

Uploaded KBs persist as the same JSONL format used everywhere else. Retrieval
indexes are the expensive part users rebuild while exploring, so built
(kb, candidate_generator) pairs are cached LRU with single-flight builds.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from collections import OrderedDict

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import output
from .backends import canonical_body
from .errors import EntlinkError, InvalidParams, StageError, TransportError, UnknownComponent
from .kb import load_kb, parse_kb_lines
from .pipeline import build_pipeline
from .registry import Registry, default_registry
from .types import PipelineConfig, merge_config

logger = logging.getLogger(__name__)

DEFAULT_MAX_TEXT_CHARS = 100_000
DEFAULT_INDEX_CACHE_SIZE = 8

DEFAULT_SERVER_CONFIG = {
    "loader": {"name": "auto"},
    "ner": {"name": "gazetteer"},
    "candidate_generator": {"name": "bm25"},
    "reranker": {"name": "none"},
    "disambiguator": {"name": "first"},
    "knowledge_base": {"name": "jsonl"},
}


class _KbStore:
    """JSONL files under data_dir plus a manifest of (id, name, entity count)."""

    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        self.manifest_path = os.path.join(data_dir, "manifest.json")
        self._lock = threading.Lock()
        os.makedirs(data_dir, exist_ok=True)

    def _read_manifest(self) -> dict:
        try:
            with open(self.manifest_path, encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError):
            return {}

    def add(self, name: str, content: str) -> tuple[str, int]:
        kb = parse_kb_lines(content.split("\n"), source=name)  # validation errors propagate
        digest = hashlib.sha256((name + "\n" + content).encode("utf-8")).hexdigest()[:12]
        with self._lock:
            path = os.path.join(self.data_dir, f"{digest}.jsonl")
            with open(path, "w", encoding="utf-8") as f:
                f.write(content if content.endswith("\n") else content + "\n")
            manifest = self._read_manifest()
            manifest[digest] = {"name": name, "entities": len(kb)}
            with open(self.manifest_path, "w", encoding="utf-8") as f:
                json.dump(manifest, f, ensure_ascii=False, indent=1)
        return digest, len(kb)

    def path_for(self, kb_id: str) -> str | None:
        path = os.path.join(self.data_dir, f"{kb_id}.jsonl")
        return path if os.path.isfile(path) else None

    def listing(self) -> list[dict]:
        manifest = self._read_manifest()
        return [
            {"kb_id": kb_id, "name": meta.get("name", kb_id), "entities": meta.get("entities", 0)}
            for kb_id, meta in sorted(manifest.items())
        ]


class _IndexCache:
    """LRU of built (kb, candidate_generator) pairs; concurrent identical
    builds coalesce on a per-key lock."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._entries: OrderedDict[str, tuple] = OrderedDict()
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def get_or_build(self, key: str, build):
        with self._guard:
            if key in self._entries:
                self._entries.move_to_end(key)
                return self._entries[key]
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            with self._guard:
                if key in self._entries:
                    self._entries.move_to_end(key)
                    return self._entries[key]
            value = build()
            with self._guard:
                self._entries[key] = value
                self._entries.move_to_end(key)
                while len(self._entries) > self.capacity:
                    evicted, _ = self._entries.popitem(last=False)
                    self._locks.pop(evicted, None)
            return value


class RunRequest(BaseModel):
    kb_id: str
    text: str
    config: dict | None = None


def create_app(
    data_dir: str,
    defaults: dict | None = None,
    registry: Registry | None = None,
    max_text_chars: int = DEFAULT_MAX_TEXT_CHARS,
    index_cache_size: int = DEFAULT_INDEX_CACHE_SIZE,
    cache_dir: str | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="entlink", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = registry or default_registry
    server_defaults = merge_config(DEFAULT_SERVER_CONFIG, defaults)
    store = _KbStore(data_dir)
    index_cache = _IndexCache(index_cache_size)

    @app.exception_handler(EntlinkError)
    async def entlink_error_handler(request: Request, exc: EntlinkError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/api/components")
    def components():
        return registry.listing()

    @app.get("/api/kb")
    def list_kbs():
        return store.listing()

    @app.post("/api/kb")
    async def upload_kb(request: Request, name: str = Query(default="unnamed")):
        body = await request.body()
        try:
            content = body.decode("utf-8")
        except UnicodeDecodeError as e:
            raise HTTPException(status_code=400, detail=f"KB body is not UTF-8: {e}")
        if not content.strip():
            raise HTTPException(status_code=400, detail="KB body is empty")
        try:
            kb_id, count = store.add(name, content)
        except EntlinkError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return {"kb_id": kb_id, "name": name, "entities": count}

    @app.post("/api/run")
    def run(req: RunRequest):
        if len(req.text) > max_text_chars:
            raise HTTPException(
                status_code=400,
                detail=f"text of {len(req.text)} chars exceeds the {max_text_chars} limit",
            )
        kb_path = store.path_for(req.kb_id)
        if kb_path is None:
            raise HTTPException(status_code=404, detail=f"unknown kb_id {req.kb_id!r}")

        merged = merge_config(server_defaults, req.config)
        merged["knowledge_base"] = {"name": "jsonl", "params": {"path": kb_path}}
        try:
            cfg = PipelineConfig.from_dict(merged)
        except (InvalidParams, UnknownComponent) as e:
            raise HTTPException(status_code=400, detail=str(e))

        gen_spec = merged.get("candidate_generator", {})
        cache_key = f"{req.kb_id}|{canonical_body(gen_spec)}"

        def build_cached():
            kb = load_kb(kb_path)
            probe = build_pipeline(cfg, registry=registry, cache_dir=cache_dir,
                                   prebuilt={"knowledge_base": kb})
            return kb, probe.candidate_generator

        try:
            kb, candidate_generator = index_cache.get_or_build(cache_key, build_cached)
            pipeline = build_pipeline(
                cfg,
                registry=registry,
                cache_dir=cache_dir,
                prebuilt={"knowledge_base": kb, "candidate_generator": candidate_generator},
            )
        except (InvalidParams, UnknownComponent) as e:
            raise HTTPException(status_code=400, detail=str(e))
        except TransportError as e:
            raise HTTPException(status_code=502, detail={"stage": "retrieve", "error": str(e)})

        try:
            annotated = pipeline.run_text(req.text, doc_id="request")
        except (StageError, TransportError) as e:
            stage = getattr(e, "stage", "backend")
            raise HTTPException(status_code=502, detail={"stage": stage, "error": str(e)})
        return output.annotated_to_dict(annotated, include_timings=True)

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    app.state.kb_store = store
    app.state.index_cache = index_cache
    return app
