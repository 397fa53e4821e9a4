// HTTP client for the wizard service.
//
// The fetch implementation is injected so tests can swap in an
// in-memory server; error bodies ({error, message}) become typed
// ApiError values the pages can show directly.

import type { SessionStatus, SessionView, Stage } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export function describeError(err: unknown): string {
  if (err instanceof ApiError) return `${err.kind}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

async function toApiError(response: Response): Promise<ApiError> {
  let kind = "HttpError";
  let message = `request failed with status ${response.status}`;
  try {
    const body = (await response.json()) as { error?: string; message?: string };
    if (typeof body.error === "string") kind = body.error;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(response.status, kind, message);
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base = "",
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) throw await toApiError(response);
    return (await response.json()) as T;
  }

  createSession(description: string): Promise<SessionView> {
    return this.request("POST", "/api/sessions", { description });
  }

  session(id: string): Promise<SessionView> {
    return this.request("GET", `/api/sessions/${id}`);
  }

  status(id: string): Promise<SessionStatus> {
    return this.request("GET", `/api/sessions/${id}/status`);
  }

  pin(id: string, slot: number): Promise<SessionView> {
    return this.request("POST", `/api/sessions/${id}/highlights/${slot}/pin`);
  }

  unpin(id: string, slot: number): Promise<SessionView> {
    return this.request("POST", `/api/sessions/${id}/highlights/${slot}/unpin`);
  }

  regenerate(id: string, slot: number): Promise<SessionView> {
    return this.request("POST", `/api/sessions/${id}/highlights/${slot}/regenerate`);
  }

  select(id: string, slot: number): Promise<SessionView> {
    return this.request("POST", `/api/sessions/${id}/highlights/${slot}/select`);
  }

  edit(id: string, fieldPath: string, value: string): Promise<SessionView> {
    return this.request("PATCH", `/api/sessions/${id}/expansion`, { fieldPath, value });
  }

  finalize(id: string): Promise<SessionView> {
    return this.request("POST", `/api/sessions/${id}/finalize`);
  }

  back(id: string, targetStage: Stage): Promise<SessionView> {
    return this.request("POST", `/api/sessions/${id}/back`, { targetStage });
  }

  downloadUrl(id: string): string {
    return `${this.base}/api/sessions/${id}/download`;
  }

  async downloadPack(id: string): Promise<{ filename: string; bytes: Uint8Array }> {
    const response = await this.fetchFn(this.downloadUrl(id), { method: "GET" });
    if (!response.ok) throw await toApiError(response);
    const disposition = response.headers.get("Content-Disposition") ?? "";
    const match = /filename="([^"]+)"/.exec(disposition);
    const buffer = await response.arrayBuffer();
    return {
      filename: match !== null ? match[1] : "character-mod.zip",
      bytes: new Uint8Array(buffer),
    };
  }
}

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const realSleep = (ms: number): Promise<void> => new Promise((resolve) => setTimeout(resolve, ms));

// Stage runs take many provider round trips, so the service answers
// immediately and the client watches /status until the worker settles.
export async function pollUntilIdle(
  client: ApiClient,
  id: string,
  options: PollOptions = {},
): Promise<SessionStatus> {
  const intervalMs = options.intervalMs ?? 1500;
  const timeoutMs = options.timeoutMs ?? 120000;
  const sleep = options.sleep ?? realSleep;
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const status = await client.status(id);
    if (!status.busy) return status;
    if (Date.now() >= deadline) {
      throw new ApiError(0, "PollTimeout", `session ${id} still busy after ${timeoutMs}ms`);
    }
    await sleep(intervalMs);
  }
}
