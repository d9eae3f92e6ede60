"""Stage 4: pick the entity (or NIL) for a mention.

The LLM route shows the model the mention in square brackets inside its
context, the top-k candidates as a numbered list, and an explicit
"None of the candidates" option as index k+1. It asks for a bare number,
samples several completions, and takes a plurality vote. A rank-1 baseline
is available as a fallback and as a disambiguator in its own right.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .backends import HttpBackend, chat_complete
from .errors import ApiError, MalformedResponse, TransportError
from .types import Candidate, Document, LinkResult, Mention

logger = logging.getLogger(__name__)

DEFAULT_CTX_WINDOW = 256
NIL_OPTION_TEXT = "None of the candidates"

# Versioned prompt template. Changing it changes cache keys and any golden
# output downstream, so treat edits as breaking.
PROMPT_VERSION = 1
PROMPT_HEADER = (
    "You will see a text snippet in which one mention is marked with [square brackets], "
    "followed by a numbered list of entities."
)
PROMPT_QUESTION = (
    "Which entity does the bracketed mention refer to? "
    "Answer with a single number and nothing else."
)


def bracket_span(text: str, start: int, end: int) -> str:
    """Insert square brackets around [start, end) in text."""
    return text[:start] + "[" + text[start:end] + "]" + text[end:]


@dataclass
class PromptSpec:
    context: str  # with the mention bracketed
    mention_surface: str
    options: list[tuple[int, str, str]]  # (index, label, description)
    nil_index: int

    def render(self) -> str:
        lines = [PROMPT_HEADER, "", f"Text: {self.context}", f"Mention: {self.mention_surface}", "", "Entities:"]
        for index, label, description in self.options:
            if description:
                lines.append(f"{index}. {label} — {description}")
            else:
                lines.append(f"{index}. {label}")
        lines.append(f"{self.nil_index}. {NIL_OPTION_TEXT}")
        lines.append("")
        lines.append(PROMPT_QUESTION)
        return "\n".join(lines)

    def messages(self) -> list[dict]:
        return [{"role": "user", "content": self.render()}]


def build_prompt(
    doc: Document,
    mention: Mention,
    candidates: list[Candidate],
    ctx_window: int = DEFAULT_CTX_WINDOW,
) -> PromptSpec:
    """Cut a +/- ctx_window context around the mention and bracket it."""
    lo = max(0, mention.start - ctx_window)
    hi = min(len(doc.text), mention.end + ctx_window)
    context = bracket_span(doc.text[lo:hi], mention.start - lo, mention.end - lo)
    options = [(i + 1, c.label, c.description) for i, c in enumerate(candidates)]
    return PromptSpec(
        context=context,
        mention_surface=mention.surface,
        options=options,
        nil_index=len(candidates) + 1,
    )


VOTE_CANDIDATE = "candidate"
VOTE_NIL = "nil"
VOTE_INVALID = "invalid"

_THINK_RE = re.compile(r"<think>.*?</think>", re.DOTALL)
_INT_RE = re.compile(r"-?\d+")


@dataclass(frozen=True)
class Vote:
    raw: str
    kind: str = VOTE_INVALID
    index: int | None = None  # 1-based candidate index when kind == "candidate"


def parse_choice(completion: str, k: int) -> Vote:
    """Extract the first integer after stripping reasoning markup.

    1..k selects that candidate, k+1 is NIL, anything else (no integer,
    out of range) is an invalid vote, which is a value, not an error.
    """
    cleaned = _THINK_RE.sub(" ", completion)
    m = _INT_RE.search(cleaned)
    if m is None:
        return Vote(raw=completion)
    value = int(m.group(0))
    if 1 <= value <= k:
        return Vote(raw=completion, kind=VOTE_CANDIDATE, index=value)
    if value == k + 1:
        return Vote(raw=completion, kind=VOTE_NIL)
    return Vote(raw=completion)


def self_consistency(
    votes: list[Vote], candidates: list[Candidate]
) -> tuple[str | None, dict[str | None, int], float, bool]:
    """Plurality vote over the valid samples.

    Ties between candidate indices go to the smaller index (the better
    rerank position); a tie between NIL and a candidate goes to the
    candidate. With no valid votes at all, fall back to the rank-1
    candidate (NIL when the list is empty).

    Returns (decision, votes-by-decision, confidence, fallback_used).
    """
    counts: dict[int | None, int] = {}  # key: candidate index or None for NIL
    for vote in votes:
        if vote.kind == VOTE_CANDIDATE:
            counts[vote.index] = counts.get(vote.index, 0) + 1
        elif vote.kind == VOTE_NIL:
            counts[None] = counts.get(None, 0) + 1
    vote_map: dict[str | None, int] = {}
    for key in sorted(counts, key=lambda k: (k is None, k if k is not None else 0)):
        decision_key = None if key is None else candidates[key - 1].entity_id
        vote_map[decision_key] = counts[key]
    total_valid = sum(counts.values())
    if total_valid == 0:
        if candidates:
            return candidates[0].entity_id, vote_map, 0.0, True
        return None, vote_map, 0.0, True
    best = max(counts.items(), key=lambda kv: (kv[1], kv[0] is not None, -(kv[0] or 0)))
    winner_key, winner_count = best
    decision = None if winner_key is None else candidates[winner_key - 1].entity_id
    return decision, vote_map, winner_count / total_valid, False


def disambiguate_first(candidates: list[Candidate], mention: Mention | None = None) -> LinkResult:
    """Retrieval-rank baseline: rank-1 candidate, NIL when there is none."""
    decision = candidates[0].entity_id if candidates else None
    return LinkResult(
        mention=mention,
        decision=decision,
        votes={},
        confidence=1.0,
        fallback_used=False,
        candidates=candidates,
    )


def disambiguate_llm(
    doc: Document,
    mention: Mention,
    candidates: list[Candidate],
    backend: HttpBackend,
    n_samples: int = 3,
    temperature: float | None = None,
    ctx_window: int = DEFAULT_CTX_WINDOW,
) -> LinkResult:
    """One chat request with n sampled completions, then a plurality vote.

    Temperature defaults to 0.6 when sampling more than once, else 0.
    Backend failures degrade to the retrieval-rank baseline instead of
    failing the document.
    """
    if not candidates:
        return LinkResult(
            mention=mention, decision=None, votes={}, confidence=1.0, candidates=[]
        )
    if temperature is None:
        temperature = 0.6 if n_samples > 1 else 0.0
    spec = build_prompt(doc, mention, candidates, ctx_window=ctx_window)
    try:
        completions = chat_complete(
            backend, spec.messages(), n=n_samples, temperature=temperature
        )
    except (TransportError, ApiError, MalformedResponse) as e:
        logger.warning(
            "disambiguation failed for %r (%s); using retrieval-rank fallback",
            mention.surface,
            e,
        )
        result = disambiguate_first(candidates, mention)
        result.fallback_used = True
        return result
    votes = [parse_choice(c, len(candidates)) for c in completions]
    decision, vote_map, confidence, fallback = self_consistency(votes, candidates)
    return LinkResult(
        mention=mention,
        decision=decision,
        votes=vote_map,
        confidence=confidence,
        fallback_used=fallback,
        candidates=candidates,
    )


class LlmDisambiguator:
    def __init__(
        self,
        backend: HttpBackend,
        n_samples: int = 3,
        temperature: float | None = None,
        ctx_window: int = DEFAULT_CTX_WINDOW,
    ):
        self.backend = backend
        self.n_samples = n_samples
        self.temperature = temperature
        self.ctx_window = ctx_window

    def resolve(self, doc: Document, mention: Mention, candidates: list[Candidate]) -> LinkResult:
        return disambiguate_llm(
            doc,
            mention,
            candidates,
            self.backend,
            n_samples=self.n_samples,
            temperature=self.temperature,
            ctx_window=self.ctx_window,
        )


class FirstDisambiguator:
    def resolve(self, doc: Document, mention: Mention, candidates: list[Candidate]) -> LinkResult:
        return disambiguate_first(candidates, mention)
