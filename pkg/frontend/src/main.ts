/** Wires the pure renderer to the service client; one query in flight. */

import { ApiError, postQuery } from "./api.js";
import { outcomeLabel, renderApp, type Handlers } from "./render.js";
import { initialState, type AppState } from "./types.js";

export function mount(root: HTMLElement, baseUrl = "", fetchFn: typeof fetch = fetch): {
  getState: () => AppState;
  submit: (question: string) => Promise<void>;
} {
  let state = initialState();

  const handlers: Handlers = {
    onSubmit: (question) => {
      void submit(question);
    },
    onInput: (question) => {
      // Keep the typed text in state without re-rendering on every key.
      state = { ...state, question };
    },
    onDismissBanner: () => {
      setState({ banner: null });
    },
  };

  function redraw(): void {
    root.replaceChildren(renderApp(state, handlers));
  }

  function setState(patch: Partial<AppState>): void {
    state = { ...state, ...patch };
    redraw();
  }

  async function submit(question: string): Promise<void> {
    const trimmed = question.trim();
    if (!trimmed || state.pending) return;
    setState({ question: trimmed, pending: true, banner: null });
    try {
      const response = await postQuery(trimmed, baseUrl, fetchFn);
      setState({
        pending: false,
        last: { question: trimmed, response },
        history: [{ question: trimmed, outcome: outcomeLabel(response) }, ...state.history],
      });
    } catch (err) {
      const message = err instanceof ApiError ? err.message : String(err);
      // Input stays in the box so the query can be retried or edited.
      setState({
        pending: false,
        banner: message,
        history: [{ question: trimmed, outcome: "error" }, ...state.history],
      });
    }
  }

  redraw();
  return { getState: () => state, submit };
}

declare global {
  interface Window {
    durqaConsole?: ReturnType<typeof mount>;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.durqaConsole = mount(document.getElementById("app") as HTMLElement);
}
