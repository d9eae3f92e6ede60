"""Core domain types passed between pipeline stages."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidParams

FORMATS = ("text", "html", "json", "jsonl", "markdown")
STAGES = ("load", "ner", "retrieve", "rerank", "disambiguate")
SLOTS = (
    "loader",
    "ner",
    "candidate_generator",
    "reranker",
    "disambiguator",
    "knowledge_base",
)

# Global pipeline constants; overridable per config.
DEFAULT_N_RETRIEVE = 100
DEFAULT_TOP_K = 10
DEFAULT_N_SAMPLES = 3


@dataclass(frozen=True)
class Document:
    """One unit of pipeline input: raw text plus identity and provenance."""

    doc_id: str
    text: str
    source: str = "inline"
    format: str = "text"


@dataclass(frozen=True)
class Mention:
    """A character span [start, end) in a document, with type label and score."""

    start: int
    end: int
    surface: str
    label: str
    score: float = 1.0

    def validate(self, text: str):
        if not (0 <= self.start < self.end <= len(text)):
            raise ValueError(f"span ({self.start},{self.end}) out of range for len {len(text)}")
        if text[self.start : self.end] != self.surface:
            raise ValueError(f"surface {self.surface!r} != text[{self.start}:{self.end}]")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0,1]")


@dataclass
class Candidate:
    """A KB entity scored against one mention. rank 1 is best."""

    entity_id: str
    label: str
    description: str
    retrieval_score: float
    rank: int
    rerank_score: float | None = None

    @property
    def governing_score(self) -> float:
        return self.rerank_score if self.rerank_score is not None else self.retrieval_score


@dataclass
class LinkResult:
    """Final resolution of one mention.

    decision is an entity id, or None for NIL. resolved is False when the
    pipeline ran without a disambiguation stage, in which case decision
    carries no meaning and is omitted from serialized output.
    """

    mention: Mention
    decision: str | None = None
    votes: dict[str | None, int] = field(default_factory=dict)
    confidence: float = 0.0
    fallback_used: bool = False
    candidates: list[Candidate] = field(default_factory=list)
    resolved: bool = True
    decision_extra: dict = field(default_factory=dict)  # extra KB columns of the decided entity


@dataclass(frozen=True)
class StageTiming:
    stage: str
    elapsed_ms: float


@dataclass
class AnnotatedDocument:
    """A document with its link results and per-stage timings."""

    document: Document
    results: list[LinkResult] = field(default_factory=list)
    timings: list[StageTiming] = field(default_factory=list)

    def timings_ms(self) -> dict[str, float]:
        return {t.stage: t.elapsed_ms for t in self.timings}


@dataclass
class ComponentSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class PipelineConfig:
    """Six component slots plus the global retrieval/voting constants."""

    loader: ComponentSpec
    ner: ComponentSpec
    candidate_generator: ComponentSpec
    reranker: ComponentSpec
    disambiguator: ComponentSpec
    knowledge_base: ComponentSpec
    n_retrieve: int = DEFAULT_N_RETRIEVE
    top_k: int = DEFAULT_TOP_K
    n_samples: int = DEFAULT_N_SAMPLES

    def validate(self):
        if self.top_k < 1:
            raise InvalidParams(f"top_k must be >= 1, got {self.top_k}")
        if self.n_retrieve < self.top_k:
            raise InvalidParams(
                f"n_retrieve ({self.n_retrieve}) must be >= top_k ({self.top_k})"
            )
        if self.n_samples < 1:
            raise InvalidParams(f"n_samples must be >= 1, got {self.n_samples}")

    def spec_for(self, slot: str) -> ComponentSpec:
        return getattr(self, slot)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        """Parse the JSON config object: the six slot keys plus optional "params".

        Unknown keys are rejected so typos fail loudly.
        """
        if not isinstance(raw, dict):
            raise InvalidParams("config must be a JSON object")
        allowed = set(SLOTS) | {"params"}
        unknown = set(raw) - allowed
        if unknown:
            raise InvalidParams(f"unknown config keys: {sorted(unknown)}")
        missing = [s for s in SLOTS if s not in raw]
        if missing:
            raise InvalidParams(f"config missing component slots: {missing}")
        specs = {}
        for slot in SLOTS:
            specs[slot] = _parse_spec(slot, raw[slot])
        globals_ = raw.get("params", {})
        if not isinstance(globals_, dict):
            raise InvalidParams('"params" must be an object')
        g_allowed = {"n_retrieve", "top_k", "n_samples"}
        g_unknown = set(globals_) - g_allowed
        if g_unknown:
            raise InvalidParams(f"unknown global params: {sorted(g_unknown)}")
        for key, val in globals_.items():
            if not isinstance(val, int) or isinstance(val, bool):
                raise InvalidParams(f"global param {key!r} must be an integer")
        cfg = cls(
            **specs,
            n_retrieve=globals_.get("n_retrieve", DEFAULT_N_RETRIEVE),
            top_k=globals_.get("top_k", DEFAULT_TOP_K),
            n_samples=globals_.get("n_samples", DEFAULT_N_SAMPLES),
        )
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {}
        for slot in SLOTS:
            spec = self.spec_for(slot)
            entry: dict = {"name": spec.name}
            if spec.params:
                entry["params"] = spec.params
            out[slot] = entry
        out["params"] = {
            "n_retrieve": self.n_retrieve,
            "top_k": self.top_k,
            "n_samples": self.n_samples,
        }
        return out


def _parse_spec(slot: str, raw) -> ComponentSpec:
    if not isinstance(raw, dict):
        raise InvalidParams(f"slot {slot!r} must be an object with a \"name\"")
    unknown = set(raw) - {"name", "params"}
    if unknown:
        raise InvalidParams(f"slot {slot!r} has unknown keys: {sorted(unknown)}")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        raise InvalidParams(f"slot {slot!r} needs a non-empty string \"name\"")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise InvalidParams(f"slot {slot!r} params must be an object")
    return ComponentSpec(name=name, params=dict(params))


def merge_config(base: dict, override: dict | None) -> dict:
    """Overlay a partial config object onto a full default one.

    Component slots replace wholesale except that params merge key-by-key
    when the component name is unchanged; the global "params" object merges
    key-by-key.
    """
    merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}
    if not override:
        return merged
    if not isinstance(override, dict):
        raise InvalidParams("partial config must be a JSON object")
    for key, val in override.items():
        if key == "params" and isinstance(val, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **val}
        elif (
            key in SLOTS
            and isinstance(val, dict)
            and isinstance(merged.get(key), dict)
            and val.get("name", merged[key].get("name")) == merged[key].get("name")
        ):
            slot = dict(merged[key])
            if "params" in val and isinstance(val["params"], dict):
                slot["params"] = {**slot.get("params", {}), **val["params"]}
            for k2, v2 in val.items():
                if k2 != "params":
                    slot[k2] = v2
            merged[key] = slot
        else:
            merged[key] = val
    return merged
