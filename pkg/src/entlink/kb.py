"""JSONL knowledge base: loading, validation, lookup."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .errors import DuplicateId, MissingField, ParseError

logger = logging.getLogger(__name__)


@dataclass
class KBEntity:
    """One KB record. Unknown JSONL keys are preserved in .extra untouched."""

    id: str
    label: str
    description: str = ""
    extra: dict = field(default_factory=dict)


class KnowledgeBase:
    """Immutable, ordered entity collection with id lookup.

    Entity order is file order; retrieval ties break by this order.
    """

    def __init__(self, entities: list[KBEntity]):
        self.entities = list(entities)
        self.by_id = {e.id: i for i, e in enumerate(self.entities)}
        if len(self.by_id) != len(self.entities):
            seen: dict[str, int] = {}
            for i, e in enumerate(self.entities):
                if e.id in seen:
                    raise DuplicateId(e.id, seen[e.id] + 1, i + 1)
                seen[e.id] = i

    def __len__(self):
        return len(self.entities)

    def __iter__(self):
        return iter(self.entities)

    def get(self, entity_id: str) -> KBEntity | None:
        idx = self.by_id.get(entity_id)
        return self.entities[idx] if idx is not None else None


def _entity_from_obj(obj, line_no: int) -> KBEntity:
    if not isinstance(obj, dict):
        raise ParseError("KB line is not a JSON object", line_no)
    for key in ("id", "label"):
        val = obj.get(key)
        if not isinstance(val, str) or not val:
            raise MissingField(key, line_no)
    description = obj.get("description")
    if description is None:
        raise MissingField("description", line_no)
    if not isinstance(description, str):
        raise ParseError('"description" must be a string', line_no)
    if description == "":
        logger.warning("KB entity %r (line %d) has an empty description", obj["id"], line_no)
    extra = {k: v for k, v in obj.items() if k not in ("id", "label", "description")}
    return KBEntity(id=obj["id"], label=obj["label"], description=description, extra=extra)


def parse_kb_lines(lines, source: str = "<memory>") -> KnowledgeBase:
    """Parse JSONL lines into a KnowledgeBase; line numbers are 1-based."""
    entities: list[KBEntity] = []
    first_line: dict[str, int] = {}
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON in {source}: {e.msg}", line_no) from e
        entity = _entity_from_obj(obj, line_no)
        if entity.id in first_line:
            raise DuplicateId(entity.id, first_line[entity.id], line_no)
        first_line[entity.id] = line_no
        entities.append(entity)
    return KnowledgeBase(entities)


def load_kb(path: str) -> KnowledgeBase:
    """Load a newline-delimited JSON KB file (UTF-8, one entity per line)."""
    with open(path, encoding="utf-8") as f:
        return parse_kb_lines(f, source=path)


def serialize_kb(kb: KnowledgeBase) -> str:
    """Inverse of load_kb on valid KBs (round-trips entities and extra keys)."""
    lines = []
    for e in kb:
        obj = {"id": e.id, "label": e.label, "description": e.description}
        obj.update(e.extra)
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def candidate_text(e: KBEntity) -> str:
    """Ranking text for an entity: "label: description", label alone if empty."""
    if not e.description:
        return e.label
    return f"{e.label}: {e.description}"
