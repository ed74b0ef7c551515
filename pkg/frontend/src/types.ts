/** Wire types mirroring the service's /v1/query response. */

export type Source = "dense" | "sparse" | "both";

export interface PassageView {
  chunk_id: string;
  text: string;
  source: Source;
  fused_score: number;
  final_rank: number;
}

export interface QueryResponse {
  choice: 1 | 2 | 3 | 4 | null;
  judgment: "contraindicated" | "not_contraindicated" | null;
  grounded_declared: boolean | null;
  rationale: string | null;
  entities: string[];
  category: string | null;
  passages: PassageView[];
  parse_error?: string;
  raw?: string;
}

export interface HistoryItem {
  question: string;
  /** Short outcome label shown in the history list. */
  outcome: string;
}

/** Whole-app state; rendering is a pure function of this object. */
export interface AppState {
  question: string;
  pending: boolean;
  banner: string | null;
  last: { question: string; response: QueryResponse } | null;
  history: HistoryItem[];
}

export function initialState(): AppState {
  return { question: "", pending: false, banner: null, last: null, history: [] };
}
