// Payload shapes of the linking service API.

export interface CandidateOut {
  id: string;
  rank: number;
  score: number;
}

export interface EntityOut {
  id: string;
  label: string;
  description: string;
}

export interface MentionOut {
  start: number;
  end: number;
  surface: string;
  label: string;
  // absent in detection-only runs; null means NIL
  entity_id?: string | null;
  confidence?: number;
  entity?: EntityOut;
  entity_extra?: Record<string, unknown>;
  candidates: CandidateOut[];
}

export interface RunResponse {
  doc_id: string;
  mentions: MentionOut[];
  timings_ms: Record<string, number>;
}

export type ComponentListing = Record<string, string[]>;

export interface KbInfo {
  kb_id: string;
  name: string;
  entities: number;
}

export interface GlobalParams {
  n_retrieve: number;
  top_k: number;
  n_samples: number;
}

// What the config form tracks; maps 1:1 onto the partial config JSON.
export interface UiConfigState {
  ner: string;
  nerLabels: string;          // comma separated, remote NER only
  nerThreshold: number;
  nerPatterns: string;        // JSON object text, regex NER only
  candidateGenerator: string;
  reranker: string;
  disambiguator: string;
  backendBaseUrl: string;     // shared by remote components
  backendModel: string;
  globals: GlobalParams;
}
