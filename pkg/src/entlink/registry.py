"""Slot/name registry that resolves config entries to component factories.

A factory is a callable (params: dict, ctx: BuildContext) -> component.
Re-registering a name replaces the previous factory (and is logged), so user
code can swap built-ins for its own implementations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import EntlinkError, UnknownComponent
from .kb import KnowledgeBase
from .types import SLOTS, PipelineConfig

logger = logging.getLogger(__name__)


@dataclass
class BuildContext:
    """What factories may need besides their own params."""

    config: PipelineConfig
    kb: KnowledgeBase | None = None
    cache_dir: str | None = None
    extras: dict = field(default_factory=dict)


class Registry:
    def __init__(self):
        self._factories: dict[str, dict[str, object]] = {slot: {} for slot in SLOTS}

    def register(self, slot: str, name: str, factory):
        if slot not in self._factories:
            raise EntlinkError(f"unknown slot {slot!r}; expected one of {SLOTS}")
        if not name:
            raise EntlinkError("component name must be non-empty")
        if name in self._factories[slot]:
            logger.info("replacing component %s/%s", slot, name)
        self._factories[slot][name] = factory

    def resolve(self, slot: str, name: str):
        if slot not in self._factories:
            raise UnknownComponent(slot, name)
        factory = self._factories[slot].get(name)
        if factory is None:
            raise UnknownComponent(slot, name)
        return factory

    def names(self, slot: str) -> list[str]:
        return sorted(self._factories.get(slot, {}))

    def listing(self) -> dict[str, list[str]]:
        return {slot: self.names(slot) for slot in SLOTS}


default_registry = Registry()


def register_component(slot: str, name: str, factory):
    """Register into the process-wide default registry."""
    default_registry.register(slot, name, factory)
