"""Zero-shot entity linking against user-supplied knowledge bases.

Typical use:

    from entlink import build_pipeline

    config = {
        "loader": {"name": "text"},
        "ner": {"name": "gazetteer"},
        "candidate_generator": {"name": "bm25"},
        "reranker": {"name": "none"},
        "disambiguator": {"name": "first"},
        "knowledge_base": {"name": "jsonl", "params": {"path": "my_kb.jsonl"}},
    }
    pipeline = build_pipeline(config)
    results = pipeline.run_file("docs/file1.txt")
"""

from .errors import EntlinkError
from .kb import KBEntity, KnowledgeBase, candidate_text, load_kb
from .pipeline import Pipeline, build_pipeline
from .registry import Registry, default_registry, register_component
from .types import (
    AnnotatedDocument,
    Candidate,
    Document,
    LinkResult,
    Mention,
    PipelineConfig,
    StageTiming,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedDocument",
    "Candidate",
    "Document",
    "EntlinkError",
    "KBEntity",
    "KnowledgeBase",
    "LinkResult",
    "Mention",
    "Pipeline",
    "PipelineConfig",
    "Registry",
    "StageTiming",
    "build_pipeline",
    "candidate_text",
    "default_registry",
    "load_kb",
    "register_component",
    "__version__",
]
