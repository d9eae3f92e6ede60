// Client-side validation mirroring the server's rules, so bad submissions
// are blocked before they leave the browser.

import type { GlobalParams, UiConfigState } from "./types.js";

export interface LineError {
  line: number;
  message: string;
}

export function validateGlobals(g: GlobalParams): string[] {
  const errors: string[] = [];
  if (!Number.isInteger(g.top_k) || g.top_k < 1) {
    errors.push("top_k must be a positive integer");
  }
  if (!Number.isInteger(g.n_retrieve) || g.n_retrieve < 1) {
    errors.push("n_retrieve must be a positive integer");
  }
  if (Number.isInteger(g.top_k) && Number.isInteger(g.n_retrieve) && g.n_retrieve < g.top_k) {
    errors.push(`n_retrieve (${g.n_retrieve}) must be >= top_k (${g.top_k})`);
  }
  if (!Number.isInteger(g.n_samples) || g.n_samples < 1) {
    errors.push("n_samples must be a positive integer");
  }
  return errors;
}

export function validateConfigState(state: UiConfigState): string[] {
  const errors = validateGlobals(state.globals);
  if (state.ner === "regex") {
    try {
      const patterns = JSON.parse(state.nerPatterns || "");
      if (
        typeof patterns !== "object" ||
        patterns === null ||
        Array.isArray(patterns) ||
        Object.keys(patterns).length === 0
      ) {
        errors.push("regex patterns must be a non-empty JSON object (label -> regex)");
      }
    } catch {
      errors.push("regex patterns must be valid JSON");
    }
  }
  if (state.ner === "remote" && !state.nerLabels.trim()) {
    errors.push("remote NER needs at least one label");
  }
  const needsBackend =
    state.ner === "remote" ||
    state.candidateGenerator === "dense" ||
    state.reranker === "remote" ||
    state.disambiguator === "llm";
  if (needsBackend && !state.backendBaseUrl.trim()) {
    errors.push("remote components need a backend base URL");
  }
  return errors;
}

/** Per-line JSONL validation mirroring the server KB loader: one object per
 *  line with non-empty string id/label and a string description; ids unique. */
export function validateKbJsonl(text: string): { errors: LineError[]; entities: number } {
  const errors: LineError[] = [];
  const seen = new Map<string, number>();
  let entities = 0;
  const lines = text.split("\n"); // JSONL: \n only, like the server
  lines.forEach((raw, i) => {
    const lineNo = i + 1;
    const line = raw.trim();
    if (!line) {
      return;
    }
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch {
      errors.push({ line: lineNo, message: "invalid JSON" });
      return;
    }
    if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
      errors.push({ line: lineNo, message: "not a JSON object" });
      return;
    }
    const record = obj as Record<string, unknown>;
    for (const key of ["id", "label"]) {
      if (typeof record[key] !== "string" || record[key] === "") {
        errors.push({ line: lineNo, message: `missing or empty "${key}"` });
        return;
      }
    }
    if (typeof record["description"] !== "string") {
      errors.push({ line: lineNo, message: 'missing "description" (empty string is allowed)' });
      return;
    }
    const id = record["id"] as string;
    const first = seen.get(id);
    if (first !== undefined) {
      errors.push({ line: lineNo, message: `duplicate id "${id}" (also on line ${first})` });
      return;
    }
    seen.set(id, lineNo);
    entities += 1;
  });
  return { errors, entities };
}
