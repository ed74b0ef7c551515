import type { AppState, QueryResponse } from "../src/types.js";
import { initialState } from "../src/types.js";

export const choiceOneResponse: QueryResponse = {
  choice: 1,
  judgment: "contraindicated",
  grounded_declared: true,
  rationale: "Sharply increased risk of myopathy and rhabdomyolysis when taken together.",
  entities: ["clocin", "simvatin"],
  category: "ddi",
  passages: [
    {
      chunk_id: "DDI001#0",
      text: "Drug-drug interaction contraindication\nDrugs: Clocin with Simvatin\nReason: Sharply increased risk of myopathy and rhabdomyolysis when taken together.",
      source: "both",
      fused_score: 0.032787,
      final_rank: 1,
    },
    {
      chunk_id: "DDI003#0",
      text: "Drug-drug interaction contraindication\nDrugs: Gemfibron with Statoral\nReason: Combined lipid-lowering therapy markedly raises myopathy and rhabdomyolysis risk.",
      source: "sparse",
      fused_score: 0.016129,
      final_rank: 2,
    },
  ],
};

export const choiceFourResponse: QueryResponse = {
  choice: 4,
  judgment: "not_contraindicated",
  grounded_declared: false,
  rationale: "no drug entity recognized in the question",
  entities: [],
  category: "pregnancy",
  passages: [],
};

export const parseErrorResponse: QueryResponse = {
  choice: null,
  judgment: null,
  grounded_declared: null,
  rationale: null,
  entities: ["adone"],
  category: "pregnancy",
  passages: [],
  parse_error: "no choice marker found",
  raw: "The model rambled without structure.",
};

export function stateWithResponse(question: string, response: QueryResponse): AppState {
  return {
    ...initialState(),
    question,
    last: { question, response },
    history: [{ question, outcome: "choice" }],
  };
}

export function errorState(question: string, message: string): AppState {
  return {
    ...initialState(),
    question,
    banner: message,
    history: [{ question, outcome: "error" }],
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
