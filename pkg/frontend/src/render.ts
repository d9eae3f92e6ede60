// Pure HTML renderers for linking results. The UI never computes links
// itself: everything shown is read straight off the /api/run payload.

import type { MentionOut, RunResponse } from "./types.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function wellFormed(text: string, mentions: MentionOut[]): boolean {
  let prev = 0;
  for (const m of mentions) {
    if (
      !Number.isInteger(m.start) ||
      !Number.isInteger(m.end) ||
      m.start < prev ||
      m.end <= m.start ||
      m.end > text.length ||
      text.slice(m.start, m.end) !== m.surface
    ) {
      return false;
    }
    prev = m.end;
  }
  return true;
}

export function tooltipText(m: MentionOut): string {
  if (m.entity_id === undefined) {
    return `detected ${m.label}`; // detection-only run
  }
  if (m.entity_id === null) {
    return "NIL — no matching entity";
  }
  if (m.entity) {
    return `${m.entity.label} — ${m.entity.description} (${m.entity.id})`;
  }
  return m.entity_id;
}

/** Highlight mentions inside the text; character offsets are honored exactly.
 *  Falls back to escaped plain text when the payload does not line up. */
export function renderAnnotations(text: string, mentions: MentionOut[] | null | undefined): string {
  if (!Array.isArray(mentions) || !wellFormed(text, mentions)) {
    return `<pre class="doc-text">${escapeHtml(text)}</pre>`;
  }
  const parts: string[] = ['<pre class="doc-text">'];
  let cursor = 0;
  for (const m of mentions) {
    parts.push(escapeHtml(text.slice(cursor, m.start)));
    const nil = m.entity_id === null;
    const cls = nil ? "mention nil" : "mention linked";
    parts.push(
      `<span class="${cls}" tabindex="0">` +
        escapeHtml(m.surface) +
        `<span class="tooltip">${escapeHtml(tooltipText(m))}</span>` +
        "</span>",
    );
    cursor = m.end;
  }
  parts.push(escapeHtml(text.slice(cursor)));
  parts.push("</pre>");
  return parts.join("");
}

export const STAGE_ORDER = ["load", "ner", "retrieve", "rerank", "disambiguate"];

/** Horizontal bar per executed stage, widths proportional to the slowest. */
export function renderTimings(timings: Record<string, number> | undefined): string {
  if (!timings || Object.keys(timings).length === 0) {
    return "";
  }
  const stages = STAGE_ORDER.filter((s) => s in timings).concat(
    Object.keys(timings).filter((s) => !STAGE_ORDER.includes(s)),
  );
  const max = Math.max(...stages.map((s) => timings[s]), 1e-9);
  const rows = stages.map((stage) => {
    const ms = timings[stage];
    const width = Math.max(1, Math.round((ms / max) * 100));
    return (
      `<div class="timing-row" data-stage="${escapeHtml(stage)}">` +
      `<span class="timing-label">${escapeHtml(stage)}</span>` +
      `<span class="timing-bar" style="width:${width}%"></span>` +
      `<span class="timing-ms">${ms.toFixed(1)} ms</span></div>`
    );
  });
  return `<div class="timings">${rows.join("")}</div>`;
}

export function renderResult(text: string, payload: RunResponse): string {
  const banner =
    payload.mentions.length === 0
      ? '<div class="banner">No mentions detected.</div>'
      : "";
  return banner + renderAnnotations(text, payload.mentions) + renderTimings(payload.timings_ms);
}
