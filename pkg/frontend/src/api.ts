import type { AdjudicationTask, Decision, SessionStats, SubmitAck } from "./types.js";

/** A structured service error: validation problems, unknown anchors, busy. */
export class ApiError extends Error {
  constructor(
    readonly kind: string,
    readonly detail: string = "",
    readonly status: number = 0,
  ) {
    super(detail === "" ? kind : `${kind}: ${detail}`);
    this.name = "ApiError";
  }
}

/** The request never reached the service (offline, refused, timed out). */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`network failure: ${String(cause)}`);
    this.name = "NetworkError";
  }
}

export type NextTaskResult =
  | { kind: "task"; task: AdjudicationTask }
  | { kind: "exhausted" }
  | { kind: "busy"; detail: string };

/** The surface the controller needs; stubbed out in tests. */
export interface ApiLike {
  nextTask(session: string): Promise<NextTaskResult>;
  submit(decision: Decision): Promise<SubmitAck>;
  stats(): Promise<SessionStats>;
  exportCsv(): Promise<string>;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient implements ApiLike {
  constructor(
    private baseUrl = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    try {
      return await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new NetworkError(err);
    }
  }

  async nextTask(session: string): Promise<NextTaskResult> {
    const resp = await this.request(`/api/next-task?session=${encodeURIComponent(session)}`);
    if (resp.status === 409) {
      const body = (await resp.json()) as { error: string; detail?: string };
      return body.error === "exhausted"
        ? { kind: "exhausted" }
        : { kind: "busy", detail: body.detail ?? "" };
    }
    if (!resp.ok) {
      throw new ApiError("http_error", `unexpected status ${resp.status}`, resp.status);
    }
    return { kind: "task", task: (await resp.json()) as AdjudicationTask };
  }

  async submit(decision: Decision): Promise<SubmitAck> {
    const resp = await this.request("/api/decision", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(decision),
    });
    if (!resp.ok) {
      const body = (await resp.json()) as { error?: string; detail?: string };
      throw new ApiError(body.error ?? "http_error", body.detail ?? "", resp.status);
    }
    return (await resp.json()) as SubmitAck;
  }

  async stats(): Promise<SessionStats> {
    const resp = await this.request("/api/stats");
    if (!resp.ok) {
      throw new ApiError("http_error", `unexpected status ${resp.status}`, resp.status);
    }
    return (await resp.json()) as SessionStats;
  }

  async exportCsv(): Promise<string> {
    const resp = await this.request("/api/export");
    if (!resp.ok) {
      throw new ApiError("http_error", `unexpected status ${resp.status}`, resp.status);
    }
    return await resp.text();
  }
}
