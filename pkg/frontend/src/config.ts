// Turn form state into the partial pipeline config the server expects.

import type { UiConfigState } from "./types.js";

interface ComponentSpec {
  name: string;
  params?: Record<string, unknown>;
}

export function defaultConfigState(): UiConfigState {
  return {
    ner: "gazetteer",
    nerLabels: "person, location",
    nerThreshold: 0.5,
    nerPatterns: '{"location": "Paris|France"}',
    candidateGenerator: "bm25",
    reranker: "none",
    disambiguator: "first",
    backendBaseUrl: "",
    backendModel: "",
    globals: { n_retrieve: 100, top_k: 10, n_samples: 3 },
  };
}

function backendParams(state: UiConfigState): Record<string, unknown> {
  const params: Record<string, unknown> = { base_url: state.backendBaseUrl.trim() };
  if (state.backendModel.trim()) {
    params["model"] = state.backendModel.trim();
  }
  return params;
}

/** The JSON body for /api/run's "config" field. Mirrors the server's config
 *  object shape: {"<slot>": {"name", "params"?}, "params": {globals}}. */
export function buildPartialConfig(state: UiConfigState): Record<string, unknown> {
  const ner: ComponentSpec = { name: state.ner };
  if (state.ner === "regex") {
    ner.params = { patterns: JSON.parse(state.nerPatterns) };
  } else if (state.ner === "remote") {
    ner.params = {
      ...backendParams(state),
      labels: state.nerLabels.split(",").map((s) => s.trim()).filter(Boolean),
      threshold: state.nerThreshold,
    };
  }

  const generator: ComponentSpec = { name: state.candidateGenerator };
  if (state.candidateGenerator === "dense") {
    generator.params = backendParams(state);
  }

  const reranker: ComponentSpec = { name: state.reranker };
  if (state.reranker === "remote") {
    reranker.params = backendParams(state);
  }

  const disambiguator: ComponentSpec = { name: state.disambiguator };
  if (state.disambiguator === "llm") {
    disambiguator.params = backendParams(state);
  }

  return {
    ner,
    candidate_generator: generator,
    reranker,
    disambiguator,
    params: { ...state.globals },
  };
}
