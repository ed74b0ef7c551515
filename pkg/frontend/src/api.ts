/** Thin typed client for the durqa service; errors carry the server's message. */

import type { QueryResponse } from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number | null = null) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { error?: { message?: string } };
    if (body.error?.message) return body.error.message;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `HTTP ${response.status}`;
}

export async function postQuery(
  question: string,
  baseUrl = "",
  fetchFn: typeof fetch = fetch,
): Promise<QueryResponse> {
  let response: Response;
  try {
    response = await fetchFn(`${baseUrl}/v1/query`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ question }),
    });
  } catch (err) {
    throw new ApiError(`service unreachable: ${String(err)}`);
  }
  if (!response.ok) {
    throw new ApiError(await errorMessage(response), response.status);
  }
  return (await response.json()) as QueryResponse;
}
