"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class EntlinkError(Exception):
    """Base class for all errors raised by this package."""


class UnknownComponent(EntlinkError):
    def __init__(self, slot: str, name: str):
        super().__init__(f"no component named {name!r} registered for slot {slot!r}")
        self.slot = slot
        self.name = name


class InvalidParams(EntlinkError):
    """A component or the pipeline config rejected its parameters."""


class UnsupportedFormat(EntlinkError):
    def __init__(self, fmt: str, path: str | None = None):
        where = f" ({path})" if path else ""
        super().__init__(f"unsupported input format {fmt!r}{where}")
        self.format = fmt
        self.path = path


class NoExtension(EntlinkError):
    def __init__(self, path: str):
        super().__init__(f"cannot detect format: {path!r} has no file extension")
        self.path = path


class DecodeError(EntlinkError):
    """Input bytes are not valid UTF-8."""


class MissingField(EntlinkError):
    def __init__(self, field: str, line: int | None = None, path: str | None = None):
        at = f" at line {line}" if line is not None else ""
        src = f" in {path}" if path else ""
        super().__init__(f"missing or empty field {field!r}{at}{src}")
        self.field = field
        self.line = line
        self.path = path


class ParseError(EntlinkError):
    def __init__(self, message: str, line: int | None = None):
        at = f" at line {line}" if line is not None else ""
        super().__init__(f"{message}{at}")
        self.line = line


class DuplicateId(EntlinkError):
    def __init__(self, entity_id: str, first_line: int, second_line: int):
        super().__init__(
            f"duplicate entity id {entity_id!r} (lines {first_line} and {second_line})"
        )
        self.entity_id = entity_id
        self.first_line = first_line
        self.second_line = second_line


class InvalidWindow(EntlinkError):
    """Chunk window must be strictly larger than the overlap."""


class InvalidPattern(EntlinkError):
    """A recognizer regex failed to compile."""


class SurfaceMismatch(EntlinkError):
    """A span's surface does not match the document text; signals an offset bug."""


class MalformedResponse(EntlinkError):
    """A remote service answered with a payload we cannot interpret."""


class IndexNotBuilt(EntlinkError):
    """A retriever was queried before its index was built."""


class TransportError(EntlinkError):
    """A remote request failed after exhausting retries."""


class ApiError(EntlinkError):
    def __init__(self, status: int, body: str):
        super().__init__(f"backend returned HTTP {status}: {body[:200]}")
        self.status = status
        self.body = body


class OffsetOutOfRange(EntlinkError):
    """A gold or predicted span lies outside the document."""


class StageError(EntlinkError):
    """Wraps a failure with the pipeline stage and mention it occurred in."""

    def __init__(self, stage: str, cause: Exception, mention=None):
        ctx = f" (mention {mention.surface!r} @ {mention.start})" if mention is not None else ""
        super().__init__(f"stage {stage!r} failed{ctx}: {cause}")
        self.stage = stage
        self.cause = cause
        self.mention = mention
