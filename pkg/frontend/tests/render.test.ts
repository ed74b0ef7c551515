import { describe, expect, it } from "vitest";

import { renderApp } from "../src/render.js";
import {
  choiceFourResponse,
  choiceOneResponse,
  errorState,
  parseErrorResponse,
  stateWithResponse,
} from "./fixtures.js";

describe("choice-1 (contraindicated) state", () => {
  const state = stateWithResponse("Can Clocin and Simvatin tablets be taken together?", choiceOneResponse);

  it("renders the red contraindicated badge with the choice number", () => {
    const app = renderApp(state);
    const badge = app.querySelector(".badge");
    expect(badge).not.toBeNull();
    expect(badge!.classList.contains("contraindicated")).toBe(true);
    expect(badge!.textContent).toContain("Contraindicated");
    expect(badge!.textContent).toContain("금기");
    expect((badge as HTMLElement).dataset["choice"]).toBe("1");
  });

  it("shows the declared-grounding indicator", () => {
    const app = renderApp(state);
    const grounding = app.querySelector(".grounding");
    expect(grounding!.classList.contains("grounded")).toBe(true);
  });

  it("lists evidence in final_rank order", () => {
    const app = renderApp(state);
    const ranks = [...app.querySelectorAll(".passage")].map(
      (node) => (node as HTMLElement).dataset["finalRank"],
    );
    expect(ranks).toEqual(["1", "2"]);
    const ids = [...app.querySelectorAll(".passage-id")].map((node) => node.textContent);
    expect(ids).toEqual(["DDI001#0", "DDI003#0"]);
  });

  it("orders evidence by final_rank even when passages arrive shuffled", () => {
    const shuffled = {
      ...choiceOneResponse,
      passages: [...choiceOneResponse.passages].reverse(),
    };
    const app = renderApp(stateWithResponse("q", shuffled));
    const ranks = [...app.querySelectorAll(".passage")].map(
      (node) => (node as HTMLElement).dataset["finalRank"],
    );
    expect(ranks).toEqual(["1", "2"]);
  });

  it("highlights every queried entity inside the passage text", () => {
    const app = renderApp(state);
    const first = app.querySelector(".passage-text")!;
    const marks = [...first.querySelectorAll("mark")].map((m) => m.textContent!.toLowerCase());
    expect(marks).toContain("clocin");
    expect(marks).toContain("simvatin");
    // Highlighting must not alter the visible text.
    expect(first.textContent).toBe(choiceOneResponse.passages[0]!.text);
  });

  it("renders the rationale", () => {
    const app = renderApp(state);
    expect(app.querySelector(".rationale")!.textContent).toContain("rhabdomyolysis");
  });

  it("is snapshot-stable across two renders", () => {
    expect(renderApp(state).innerHTML).toBe(renderApp(state).innerHTML);
  });
});

describe("choice-4 (not contraindicated) state", () => {
  const state = stateWithResponse("Can a pregnant woman take Mirta tablets?", choiceFourResponse);

  it("renders the green badge and the no-evidence note", () => {
    const app = renderApp(state);
    const badge = app.querySelector(".badge")!;
    expect(badge.classList.contains("safe")).toBe(true);
    expect(badge.textContent).toContain("Not contraindicated");
    expect(app.querySelector(".no-evidence-note")!.textContent).toContain(
      "no supporting contraindication entry",
    );
  });

  it("marks the answer as not grounded", () => {
    const app = renderApp(state);
    expect(app.querySelector(".grounding")!.classList.contains("ungrounded")).toBe(true);
  });

  it("is snapshot-stable across two renders", () => {
    expect(renderApp(state).innerHTML).toBe(renderApp(state).innerHTML);
  });
});

describe("server error state", () => {
  const state = errorState("Can a young child take Tracan tablets?", "HTTP 500");

  it("shows a dismissible banner and preserves the input", () => {
    const app = renderApp(state);
    expect(app.querySelector(".banner-message")!.textContent).toBe("HTTP 500");
    expect(app.querySelector(".banner-dismiss")).not.toBeNull();
    const input = app.querySelector(".question-input") as HTMLInputElement;
    expect(input.value).toBe("Can a young child take Tracan tablets?");
  });

  it("is snapshot-stable across two renders", () => {
    expect(renderApp(state).innerHTML).toBe(renderApp(state).innerHTML);
  });
});

describe("unstructured answer state", () => {
  const state = stateWithResponse("Can a pregnant woman take Adone tablets?", parseErrorResponse);

  it("renders the unstructured badge and the raw model text", () => {
    const app = renderApp(state);
    expect(app.querySelector(".badge")!.classList.contains("unstructured")).toBe(true);
    expect(app.querySelector(".raw-output")!.textContent).toBe(
      "The model rambled without structure.",
    );
  });

  it("is snapshot-stable across two renders", () => {
    expect(renderApp(state).innerHTML).toBe(renderApp(state).innerHTML);
  });
});

describe("pending state", () => {
  it("disables the submit button while a query is in flight", () => {
    const state = { ...errorState("q", "x"), banner: null, pending: true };
    const app = renderApp(state);
    const button = app.querySelector(".submit") as HTMLButtonElement;
    expect(button.disabled).toBe(true);
    expect(button.textContent).toContain("asking");
  });
});

describe("history", () => {
  it("lists past queries with outcomes", () => {
    const state = stateWithResponse("q1", choiceOneResponse);
    state.history = [
      { question: "q1", outcome: "choice 1 · contraindicated" },
      { question: "q0", outcome: "error" },
    ];
    const app = renderApp(state);
    const rows = [...app.querySelectorAll(".history-item")];
    expect(rows).toHaveLength(2);
    expect(rows[0]!.textContent).toContain("q1");
    expect(rows[1]!.textContent).toContain("error");
  });
});
