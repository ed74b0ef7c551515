/** Pure DOM construction: the same state always yields the same tree. */

import { findTermSpans, highlightedFragment } from "./highlight.js";
import type { AppState, PassageView, QueryResponse } from "./types.js";

export interface Handlers {
  onSubmit: (question: string) => void;
  onInput: (question: string) => void;
  onDismissBanner: () => void;
}

export const noopHandlers: Handlers = {
  onSubmit: () => undefined,
  onInput: () => undefined,
  onDismissBanner: () => undefined,
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function judgmentBadge(response: QueryResponse): HTMLElement {
  if (response.parse_error !== undefined || response.choice === null) {
    return el("span", "badge unstructured", "unstructured answer");
  }
  const contraindicated = response.judgment === "contraindicated";
  const badge = el(
    "span",
    contraindicated ? "badge contraindicated" : "badge safe",
    contraindicated
      ? `금기 / Contraindicated (${response.choice})`
      : `비금기 / Not contraindicated (${response.choice})`,
  );
  badge.dataset["choice"] = String(response.choice);
  return badge;
}

function groundingIndicator(response: QueryResponse): HTMLElement {
  const grounded = response.grounded_declared === true;
  const indicator = el(
    "span",
    grounded ? "grounding grounded" : "grounding ungrounded",
    grounded ? "근거 제시 / grounded in retrieved context" : "근거 없음 / no explicit context support",
  );
  indicator.dataset["grounded"] = String(grounded);
  return indicator;
}

function passageItem(passage: PassageView, entities: string[]): HTMLElement {
  const item = el("li", "passage");
  item.dataset["chunkId"] = passage.chunk_id;
  item.dataset["finalRank"] = String(passage.final_rank);
  const meta = el("div", "passage-meta");
  meta.append(
    el("span", "passage-rank", `#${passage.final_rank}`),
    el("span", "passage-id", passage.chunk_id),
    el("span", `passage-source source-${passage.source}`, passage.source),
    el("span", "passage-score", passage.fused_score.toFixed(6)),
  );
  const body = el("div", "passage-text");
  body.append(highlightedFragment(passage.text, findTermSpans(passage.text, entities)));
  item.append(meta, body);
  return item;
}

function resultSection(question: string, response: QueryResponse): HTMLElement {
  const section = el("section", "result");
  section.append(el("h2", "result-question", question));

  const verdict = el("div", "verdict");
  verdict.append(judgmentBadge(response));
  if (response.parse_error === undefined && response.choice !== null) {
    verdict.append(groundingIndicator(response));
  }
  section.append(verdict);

  if (response.parse_error !== undefined) {
    section.append(el("p", "parse-error-note", `could not parse the model output: ${response.parse_error}`));
    section.append(el("pre", "raw-output", response.raw ?? ""));
    return section;
  }

  if (response.rationale) {
    section.append(el("p", "rationale", response.rationale));
  }
  if (response.judgment === "not_contraindicated" && response.grounded_declared === false) {
    section.append(el("p", "no-evidence-note", "no supporting contraindication entry"));
  }

  const evidenceTitle = el("h3", "evidence-title", `evidence passages (${response.passages.length})`);
  const list = el("ol", "evidence");
  const ordered = [...response.passages].sort((a, b) => a.final_rank - b.final_rank);
  for (const passage of ordered) {
    list.append(passageItem(passage, response.entities));
  }
  section.append(evidenceTitle, list);
  return section;
}

export function renderApp(state: AppState, handlers: Handlers = noopHandlers): HTMLElement {
  const app = el("div", "app");
  app.append(el("h1", "title", "durqa contraindication console"));

  const form = el("form", "query-form");
  const input = el("input", "question-input");
  input.type = "text";
  input.placeholder = "e.g. Can a pregnant woman take Adone tablets?";
  input.value = state.question;
  input.addEventListener("input", () => handlers.onInput(input.value));
  const submit = el("button", "submit", state.pending ? "asking…" : "ask");
  submit.type = "submit";
  submit.disabled = state.pending;
  form.append(input, submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!state.pending) handlers.onSubmit(input.value);
  });
  app.append(form);

  if (state.banner !== null) {
    const banner = el("div", "banner");
    banner.append(el("span", "banner-message", state.banner));
    const dismiss = el("button", "banner-dismiss", "dismiss");
    dismiss.type = "button";
    dismiss.addEventListener("click", () => handlers.onDismissBanner());
    banner.append(dismiss);
    app.append(banner);
  }

  if (state.last !== null) {
    app.append(resultSection(state.last.question, state.last.response));
  }

  if (state.history.length > 0) {
    app.append(el("h3", "history-title", "session history"));
    const list = el("ol", "history");
    for (const item of state.history) {
      const row = el("li", "history-item");
      row.append(
        el("span", "history-question", item.question),
        el("span", "history-outcome", item.outcome),
      );
      list.append(row);
    }
    app.append(list);
  }
  return app;
}

export function outcomeLabel(response: QueryResponse): string {
  if (response.parse_error !== undefined || response.choice === null) {
    return "unstructured";
  }
  return `choice ${response.choice} · ${response.judgment ?? "?"}`;
}
