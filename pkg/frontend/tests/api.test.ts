import { describe, expect, it, vi } from "vitest";

import { ApiError, postQuery } from "../src/api.js";
import { choiceOneResponse, jsonResponse } from "./fixtures.js";

describe("postQuery", () => {
  it("posts the question and returns the typed body", async () => {
    const fetchFn = vi.fn(async (_url: string, _init?: RequestInit) =>
      jsonResponse(choiceOneResponse),
    );
    const body = await postQuery(
      "Can Clocin and Simvatin tablets be taken together?", "", fetchFn as typeof fetch,
    );
    expect(body.choice).toBe(1);
    expect(fetchFn).toHaveBeenCalledWith(
      "/v1/query",
      expect.objectContaining({ method: "POST" }),
    );
    const init = fetchFn.mock.calls[0]![1]!;
    expect(JSON.parse(init.body as string)).toEqual({
      question: "Can Clocin and Simvatin tablets be taken together?",
    });
  });

  it("surfaces the server's structured error message", async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse({ error: { code: "invalid_request", message: "k must be between 1 and 20" } }, 400),
    );
    await expect(postQuery("q", "", fetchFn)).rejects.toThrowError(
      new ApiError("k must be between 1 and 20", 400),
    );
  });

  it("falls back to the status line for non-JSON errors", async () => {
    const fetchFn = vi.fn(async () => new Response("boom", { status: 502 }));
    await expect(postQuery("q", "", fetchFn)).rejects.toThrowError("HTTP 502");
  });

  it("wraps network failures", async () => {
    const fetchFn = vi.fn(async () => {
      throw new TypeError("fetch failed");
    });
    await expect(postQuery("q", "", fetchFn)).rejects.toThrowError(/service unreachable/);
  });

  it("prefixes a base url", async () => {
    const fetchFn = vi.fn(async (_url: string, _init?: RequestInit) =>
      jsonResponse(choiceOneResponse),
    );
    await postQuery("q", "http://127.0.0.1:8080", fetchFn as typeof fetch);
    expect(fetchFn.mock.calls[0]![0]).toBe("http://127.0.0.1:8080/v1/query");
  });
});
