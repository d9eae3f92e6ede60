"""Stage-1 mention detection.

Three recognizers: regex patterns per label, a KB-label gazetteer (keeps the
full pipeline runnable with no model server at all), and a client for a
remote zero-shot NER service. All of them see the document through
overlapping chunks and report document-level mentions; the pipeline merges
duplicates afterwards.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import chunking
from .backends import HttpBackend
from .chunking import Chunk, remap
from .errors import InvalidParams, InvalidPattern, MalformedResponse
from .kb import KnowledgeBase
from .types import Mention

GAZETTEER_LABEL = "entity"


@dataclass
class NerParams:
    labels: list[str] = field(default_factory=list)
    threshold: float = 0.5
    patterns: dict[str, str] | None = None
    window: int = chunking.DEFAULT_WINDOW
    overlap: int = chunking.DEFAULT_OVERLAP


def compile_patterns(patterns: dict[str, str]) -> dict[str, re.Pattern]:
    compiled = {}
    for label, pattern in patterns.items():
        try:
            compiled[label] = re.compile(pattern)
        except re.error as e:
            raise InvalidPattern(f"pattern for label {label!r} does not compile: {e}") from e
    return compiled


def regex_ner(text: str, params: NerParams) -> list[Mention]:
    """Non-overlapping matches per pattern, score 1.0, the pattern's label.

    Matching uses Python regex semantics: leftmost, greedy quantifiers;
    alternations resolve in written order. Overlaps across different
    patterns are left for the merge step.
    """
    if not params.patterns:
        raise InvalidParams("regex recognizer needs a patterns map")
    mentions = []
    for label, compiled in compile_patterns(params.patterns).items():
        for m in compiled.finditer(text):
            if m.start() == m.end():
                continue
            mentions.append(
                Mention(start=m.start(), end=m.end(), surface=m.group(0), label=label, score=1.0)
            )
    mentions.sort(key=lambda m: (m.start, m.end, m.label))
    return mentions


def _label_regex(label: str) -> re.Pattern:
    # whole-word: no word character directly before or after the match
    return re.compile(r"(?<!\w)" + re.escape(label) + r"(?!\w)", re.IGNORECASE)


_PAREN_SUFFIX_RE = re.compile(r"\s*\([^()]*\)\s*$")


def label_aliases(label: str) -> list[str]:
    """The label itself plus, when present, the form without its trailing
    parenthetical disambiguator ("Paris (city)" also matches "Paris")."""
    aliases = [label]
    stripped = _PAREN_SUFFIX_RE.sub("", label)
    if stripped and stripped != label:
        aliases.append(stripped)
    return aliases


def gazetteer_ner(text: str, kb: KnowledgeBase, params: NerParams | None = None) -> list[Mention]:
    """Case-insensitive whole-word occurrences of KB labels.

    Longest match wins at each position; matching then continues after the
    accepted span, so output is non-overlapping.
    """
    matches: list[tuple[int, int]] = []
    seen_labels = set()
    for entity in kb:
        for alias in label_aliases(entity.label):
            key = alias.lower()
            if key in seen_labels or not alias:
                continue
            seen_labels.add(key)
            for m in _label_regex(alias).finditer(text):
                matches.append((m.start(), m.end()))
    matches.sort(key=lambda span: (span[0], -(span[1] - span[0])))
    mentions: list[Mention] = []
    last_end = -1
    for start, end in matches:
        if start < last_end:
            continue
        mentions.append(
            Mention(
                start=start,
                end=end,
                surface=text[start:end],
                label=GAZETTEER_LABEL,
                score=1.0,
            )
        )
        last_end = end
    return mentions


def remote_ner(chunks: list[Chunk], params: NerParams, backend: HttpBackend, doc_text: str) -> list[Mention]:
    """Query the NER service for all chunks in one request.

    Wire format: POST /ner {"texts": [...], "labels": [...], "threshold": t}
    -> {"spans": [[{"start","end","label","score"}, ...], ...]} with
    chunk-local character offsets. Spans below the threshold are dropped;
    out-of-range or mismatching spans are never swallowed.
    """
    if not chunks:
        return []
    if not params.labels:
        raise InvalidParams("remote NER needs a non-empty labels list")
    payload = {
        "texts": [c.text for c in chunks],
        "labels": list(params.labels),
        "threshold": params.threshold,
    }
    resp = backend.post_json("/ner", payload, kind="ner")
    span_lists = resp.get("spans")
    if not isinstance(span_lists, list) or len(span_lists) != len(chunks):
        raise MalformedResponse(
            f"NER service returned {len(span_lists) if isinstance(span_lists, list) else 'no'} "
            f"span lists for {len(chunks)} chunks"
        )
    mentions: list[Mention] = []
    for chk, spans in zip(chunks, span_lists):
        if not isinstance(spans, list):
            raise MalformedResponse("NER span list entry is not a list")
        for span in spans:
            try:
                start, end = int(span["start"]), int(span["end"])
                label = str(span["label"])
                score = float(span["score"])
            except (KeyError, TypeError, ValueError) as e:
                raise MalformedResponse(f"bad NER span object: {span!r}") from e
            if not (0 <= start < end <= len(chk.text)):
                raise MalformedResponse(
                    f"NER span ({start},{end}) out of range for chunk of length {len(chk.text)}"
                )
            if score < params.threshold:
                continue
            local = Mention(
                start=start, end=end, surface=chk.text[start:end], label=label, score=score
            )
            mentions.append(remap(chk, local, doc_text))
    return mentions


class RegexNer:
    def __init__(self, params: NerParams):
        if not params.patterns:
            raise InvalidParams("regex recognizer needs a patterns map")
        compile_patterns(params.patterns)  # fail at build time
        self.params = params

    def detect(self, chunks: list[Chunk], doc_text: str) -> list[Mention]:
        out = []
        for chk in chunks:
            for m in regex_ner(chk.text, self.params):
                out.append(remap(chk, m, doc_text))
        return out


class GazetteerNer:
    def __init__(self, kb: KnowledgeBase, params: NerParams):
        self.kb = kb
        self.params = params

    def detect(self, chunks: list[Chunk], doc_text: str) -> list[Mention]:
        out = []
        for chk in chunks:
            for m in gazetteer_ner(chk.text, self.kb, self.params):
                out.append(remap(chk, m, doc_text))
        return out


class RemoteNer:
    def __init__(self, params: NerParams, backend: HttpBackend):
        if not params.labels:
            raise InvalidParams("remote NER needs a non-empty labels list")
        self.params = params
        self.backend = backend

    def detect(self, chunks: list[Chunk], doc_text: str) -> list[Mention]:
        return remote_ner(chunks, self.params, self.backend, doc_text)
