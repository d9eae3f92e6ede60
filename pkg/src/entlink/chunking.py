"""Overlapping windows over long documents, and span bookkeeping across them.

Chunks live on a fixed stride grid (stride = window - overlap). A chunk's end
boundary is then pulled left onto the nearest whitespace inside the overlap
region, so a word straddling the raw boundary is handed whole to the next
chunk. Starts stay on the grid, which keeps full character coverage.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidWindow, SurfaceMismatch
from .types import Mention

DEFAULT_WINDOW = 2000
DEFAULT_OVERLAP = 200


@dataclass(frozen=True)
class Chunk:
    doc_offset: int
    text: str
    index: int

    @property
    def end(self) -> int:
        return self.doc_offset + len(self.text)


def chunk(text: str, window: int = DEFAULT_WINDOW, overlap: int = DEFAULT_OVERLAP) -> list[Chunk]:
    """Split text into overlapping chunks; every character stays covered."""
    if overlap < 0 or window <= overlap:
        raise InvalidWindow(f"need window > overlap >= 0, got window={window} overlap={overlap}")
    n = len(text)
    if n == 0:
        return []
    stride = window - overlap
    spans: list[tuple[int, int]] = []
    start = 0
    while True:
        end = min(start + window, n)
        spans.append((start, end))
        if end >= n:
            break
        start += stride

    chunks = []
    for i, (s, e) in enumerate(spans):
        if i + 1 < len(spans):
            next_start = spans[i + 1][0]
            # Snap left only when the boundary would split a word; never move
            # past the next chunk's start, or coverage would break.
            if e < n and not text[e - 1].isspace() and not text[e].isspace():
                for j in range(e - 1, next_start - 1, -1):
                    if text[j].isspace():
                        e = j + 1
                        break
        chunks.append(Chunk(doc_offset=s, text=text[s:e], index=i))
    return chunks


def remap(chk: Chunk, local: Mention, doc_text: str) -> Mention:
    """Shift a chunk-local mention into document coordinates.

    The surface is re-read from the document; a mismatch is an offset bug
    upstream and is never swallowed.
    """
    start = chk.doc_offset + local.start
    end = chk.doc_offset + local.end
    if not (0 <= start < end <= len(doc_text)):
        raise SurfaceMismatch(
            f"remapped span ({start},{end}) out of range for document of length {len(doc_text)}"
        )
    surface = doc_text[start:end]
    if surface != local.surface:
        raise SurfaceMismatch(
            f"surface {local.surface!r} != document text {surface!r} at ({start},{end})"
        )
    return Mention(start=start, end=end, surface=surface, label=local.label, score=local.score)


def merge_mentions(mentions: list[Mention]) -> list[Mention]:
    """Deduplicate and overlap-resolve document-level mentions.

    Exact (start, end, label) duplicates collapse keeping the max score.
    Overlapping distinct spans are resolved longest-first, ties by higher
    score, then by smaller start. Output is sorted and non-overlapping.
    """
    best: dict[tuple[int, int, str], Mention] = {}
    for m in mentions:
        key = (m.start, m.end, m.label)
        cur = best.get(key)
        if cur is None or m.score > cur.score:
            best[key] = m
    ordered = sorted(
        best.values(),
        key=lambda m: (-(m.end - m.start), -m.score, m.start, m.label),
    )
    kept: list[Mention] = []
    for m in ordered:
        if all(m.end <= k.start or m.start >= k.end for k in kept):
            kept.append(m)
    kept.sort(key=lambda m: (m.start, m.end, m.label))
    return kept
