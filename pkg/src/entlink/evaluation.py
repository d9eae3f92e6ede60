"""InKB entity-linking F1, micro/macro aggregation, bootstrap intervals.

Matching is strict: a prediction counts only with an exact (start, end) span
match and the same entity id. Gold NIL spans are removed up front (the InKB
regime) and predicted NILs are not counted as predictions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import OffsetOutOfRange, ParseError
from .types import LinkResult


@dataclass(frozen=True)
class GoldSpan:
    start: int
    end: int
    entity_id: str | None  # None marks a gold NIL span


@dataclass
class GoldAnnotation:
    doc_id: str
    spans: list[GoldSpan] = field(default_factory=list)

    def __post_init__(self):
        self.spans = sorted(self.spans, key=lambda s: (s.start, s.end))
        prev_end = -1
        for s in self.spans:
            if s.start < 0 or s.end <= s.start:
                raise OffsetOutOfRange(f"bad gold span ({s.start},{s.end}) in {self.doc_id}")
            if s.start < prev_end:
                raise ParseError(f"overlapping gold spans in {self.doc_id}")
            prev_end = s.end


@dataclass
class EvalReport:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    precision: float = 1.0
    recall: float = 1.0
    f1: float = 1.0
    per_group: dict | None = None
    ci95: tuple[float, float] | None = None


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def report_from_counts(tp: int, fp: int, fn: int) -> EvalReport:
    precision, recall, f1 = _prf(tp, fp, fn)
    return EvalReport(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


def score_inkb(
    predictions: list[LinkResult], gold: GoldAnnotation, text_length: int | None = None
) -> EvalReport:
    """Compare predicted links against gold spans under the InKB regime."""
    if text_length is not None:
        for s in gold.spans:
            if s.end > text_length:
                raise OffsetOutOfRange(
                    f"gold span ({s.start},{s.end}) beyond document length {text_length}"
                )
        for r in predictions:
            if r.mention.end > text_length:
                raise OffsetOutOfRange(
                    f"predicted span ({r.mention.start},{r.mention.end}) beyond "
                    f"document length {text_length}"
                )
    gold_inkb = {(s.start, s.end): s.entity_id for s in gold.spans if s.entity_id is not None}
    linked = [r for r in predictions if r.resolved and r.decision is not None]
    tp = 0
    matched: set[tuple[int, int]] = set()
    for r in linked:
        key = (r.mention.start, r.mention.end)
        if key in gold_inkb and key not in matched and gold_inkb[key] == r.decision:
            tp += 1
            matched.add(key)
    fp = len(linked) - tp
    fn = len(gold_inkb) - tp
    return report_from_counts(tp, fp, fn)


def aggregate(reports: dict[str, EvalReport], mode: str = "micro") -> EvalReport:
    """micro: pool counts then compute P/R/F1; macro: unweighted means."""
    if not reports:
        raise ValueError("aggregate needs at least one group")
    tp = sum(r.tp for r in reports.values())
    fp = sum(r.fp for r in reports.values())
    fn = sum(r.fn for r in reports.values())
    if mode == "micro":
        out = report_from_counts(tp, fp, fn)
    elif mode == "macro":
        n = len(reports)
        out = EvalReport(
            tp=tp,
            fp=fp,
            fn=fn,
            precision=sum(r.precision for r in reports.values()) / n,
            recall=sum(r.recall for r in reports.values()) / n,
            f1=sum(r.f1 for r in reports.values()) / n,
        )
    else:
        raise ValueError(f"unknown aggregation mode {mode!r}")
    out.per_group = dict(reports)
    return out


def bootstrap_ci(
    per_doc: list[EvalReport], resamples: int = 1000, seed: int = 0
) -> tuple[float, float]:
    """Percentile bootstrap over documents: resample with replacement,
    compute micro F1 per resample, return the 2.5/97.5 percentiles."""
    if not per_doc:
        raise ValueError("bootstrap needs at least one document report")
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    tps = np.array([r.tp for r in per_doc])
    fps = np.array([r.fp for r in per_doc])
    fns = np.array([r.fn for r in per_doc])
    rng = np.random.default_rng(seed)
    n = len(per_doc)
    f1s = np.empty(resamples)
    for i in range(resamples):
        idx = rng.integers(0, n, size=n)
        _, _, f1s[i] = _prf(int(tps[idx].sum()), int(fps[idx].sum()), int(fns[idx].sum()))
    low, high = np.percentile(f1s, [2.5, 97.5])
    return float(low), float(high)


def load_gold(path: str) -> dict[str, GoldAnnotation]:
    """Gold file: JSONL of {"doc_id", "spans": [{"start","end","entity_id"}]}.

    entity_id null marks a NIL span.
    """
    out: dict[str, GoldAnnotation] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON in {path}: {e.msg}", line_no) from e
            try:
                spans = [
                    GoldSpan(start=int(s["start"]), end=int(s["end"]), entity_id=s.get("entity_id"))
                    for s in obj["spans"]
                ]
                ann = GoldAnnotation(doc_id=str(obj["doc_id"]), spans=spans)
            except (KeyError, TypeError) as e:
                raise ParseError(f"bad gold record in {path}: {e}", line_no) from e
            out[ann.doc_id] = ann
    return out


def report_to_dict(report: EvalReport) -> dict:
    out = {
        "tp": report.tp,
        "fp": report.fp,
        "fn": report.fn,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
    }
    if report.ci95 is not None:
        out["ci95"] = [report.ci95[0], report.ci95[1]]
    if report.per_group:
        out["per_group"] = {g: report_to_dict(r) for g, r in report.per_group.items()}
    return out


def format_table(reports: dict[str, EvalReport]) -> str:
    """Aligned-column text table, one row per group."""
    headers = ["group", "tp", "fp", "fn", "precision", "recall", "f1", "ci95"]
    rows = []
    for group, r in reports.items():
        ci = f"[{r.ci95[0]:.3f}, {r.ci95[1]:.3f}]" if r.ci95 is not None else "-"
        rows.append(
            [group, str(r.tp), str(r.fp), str(r.fn),
             f"{r.precision:.4f}", f"{r.recall:.4f}", f"{r.f1:.4f}", ci]
        )
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)
