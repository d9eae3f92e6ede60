"""Input ingestion: turn files or raw bytes into Documents.

Plain text, markdown, HTML, JSON and JSONL are supported. PDF and DOCX are
recognized but rejected with an explicit error rather than silently skipped.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from html.parser import HTMLParser

from .errors import DecodeError, MissingField, NoExtension, ParseError, UnsupportedFormat
from .types import Document

EXTENSION_MAP = {
    ".txt": "text",
    ".md": "markdown",
    ".html": "html",
    ".htm": "html",
    ".json": "json",
    ".jsonl": "jsonl",
}
REJECTED_EXTENSIONS = {".pdf": "pdf", ".docx": "docx"}


@dataclass
class RawInput:
    """Bytes to load, with optional path and format override."""

    data: bytes | None = None
    declared_format: str | None = None
    path: str | None = None


def detect_format(path: str) -> str:
    """Map a file extension to a format name; reject what we knowingly skip."""
    ext = os.path.splitext(path)[1].lower()
    if not ext:
        raise NoExtension(path)
    if ext in REJECTED_EXTENSIONS:
        raise UnsupportedFormat(REJECTED_EXTENSIONS[ext], path)
    fmt = EXTENSION_MAP.get(ext)
    if fmt is None:
        raise UnsupportedFormat(ext.lstrip("."), path)
    return fmt


class _HtmlTextExtractor(HTMLParser):
    """Tag stripper: block elements become newlines, entities are decoded."""

    BLOCK_TAGS = {
        "p", "div", "br", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6",
        "table", "tr", "th", "td", "section", "article", "header", "footer",
        "blockquote", "pre", "hr", "title",
    }
    SKIP_TAGS = {"script", "style"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self.SKIP_TAGS:
            self._skip_depth += 1
        if tag in self.BLOCK_TAGS:
            self.parts.append("\n")

    def handle_endtag(self, tag):
        if tag in self.SKIP_TAGS and self._skip_depth > 0:
            self._skip_depth -= 1
        if tag in self.BLOCK_TAGS:
            self.parts.append("\n")

    def handle_data(self, data):
        if not self._skip_depth:
            self.parts.append(data)

    def text(self) -> str:
        raw = "".join(self.parts)
        return re.sub(r"[ \t]*\n[ \t\n]*", "\n", raw).strip()


def strip_html(markup: str) -> str:
    parser = _HtmlTextExtractor()
    parser.feed(markup)
    parser.close()
    return parser.text()


def _doc_id_for(path: str | None, fallback: str = "inline") -> str:
    if not path:
        return fallback
    return os.path.splitext(os.path.basename(path))[0]


def _field_by_path(obj, dotted: str):
    cur = obj
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur:
            return None
        cur = cur[part]
    return cur


def load(raw: RawInput, text_field: str = "text") -> list[Document]:
    """Decode and split raw input into Documents.

    text/markdown yield the raw content; html is tag-stripped; json yields one
    document from the configured text field (dotted path, default "text");
    jsonl yields one document per non-empty line with fields "id" and "text".
    """
    if raw.data is None and raw.path is None:
        raise ParseError("RawInput needs bytes or a path")
    fmt = raw.declared_format or detect_format(raw.path or "")
    data = raw.data
    if data is None:
        with open(raw.path, "rb") as f:
            data = f.read()
    try:
        content = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DecodeError(f"{raw.path or '<bytes>'} is not valid UTF-8: {e}") from e

    source = raw.path or "inline"
    base_id = _doc_id_for(raw.path)

    if fmt in ("text", "markdown"):
        return [Document(doc_id=base_id, text=content, source=source, format=fmt)]
    if fmt == "html":
        return [Document(doc_id=base_id, text=strip_html(content), source=source, format=fmt)]
    if fmt == "json":
        try:
            obj = json.loads(content)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON in {source}: {e.msg}") from e
        text = _field_by_path(obj, text_field)
        if not isinstance(text, str):
            raise MissingField(text_field, path=source)
        doc_id = obj.get("id") if isinstance(obj, dict) else None
        return [
            Document(
                doc_id=str(doc_id) if doc_id is not None else base_id,
                text=text,
                source=source,
                format=fmt,
            )
        ]
    if fmt == "jsonl":
        docs = []
        # split on \n only: unicode line separators may occur inside JSON strings
        for line_no, line in enumerate(content.split("\n"), start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON in {source}: {e.msg}", line_no) from e
            if not isinstance(obj, dict) or not isinstance(obj.get(text_field), str):
                raise MissingField(text_field, line_no, source)
            doc_id = obj.get("id")
            docs.append(
                Document(
                    doc_id=str(doc_id) if doc_id is not None else f"{base_id}:{line_no}",
                    text=obj[text_field],
                    source=source,
                    format=fmt,
                )
            )
        return docs
    raise UnsupportedFormat(fmt, raw.path)


class FileLoader:
    """Loader component. A fixed format forces every input through one parser;
    format=None detects per file extension."""

    def __init__(self, format: str | None = None, text_field: str = "text"):
        self.format = format
        self.text_field = text_field

    def load_path(self, path: str) -> list[Document]:
        fmt = self.format or detect_format(path)
        return load(RawInput(path=path, declared_format=fmt), text_field=self.text_field)

    def load_bytes(self, data: bytes, path: str | None = None) -> list[Document]:
        fmt = self.format or (detect_format(path) if path else "text")
        return load(
            RawInput(data=data, declared_format=fmt, path=path), text_field=self.text_field
        )
