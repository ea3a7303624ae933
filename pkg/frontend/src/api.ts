/** Thin typed client for the reasoning service. Enforces one in-flight
 * request per session; every raw response body is retained so the UI can
 * prove that displayed programs and answers came from the server. */

import type {
  ErrorEnvelope,
  QueryResponse,
  SceneDoc,
  SceneListing,
  TraceDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly envelope: ErrorEnvelope,
  ) {
    super(`${envelope.error}: ${String(envelope.detail)}`);
    this.name = "ApiError";
  }
}

export class BusyError extends Error {
  constructor() {
    super("a request is already in flight for this session");
    this.name = "BusyError";
  }
}

export class ConsoleApi {
  private inflight = false;
  /** Raw response bodies, newest last; the provenance log for rendered content. */
  readonly received: string[] = [];

  constructor(readonly baseUrl: string) {}

  get busy(): boolean {
    return this.inflight;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    if (this.inflight) throw new BusyError();
    this.inflight = true;
    try {
      const res = await fetch(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
      const text = await res.text();
      this.received.push(text);
      const doc = JSON.parse(text);
      if (!res.ok) throw new ApiError(res.status, doc as ErrorEnvelope);
      return doc as T;
    } finally {
      this.inflight = false;
    }
  }

  health(): Promise<{ status: string; scenes: number }> {
    return this.request("GET", "/health");
  }

  async listScenes(): Promise<SceneListing[]> {
    const doc = await this.request<{ scenes: SceneListing[] }>("GET", "/scenes");
    return doc.scenes;
  }

  getScene(sceneId: string): Promise<SceneDoc> {
    return this.request("GET", `/scenes/${sceneId}`);
  }

  async openSession(sceneId: string): Promise<string> {
    const doc = await this.request<{ session_id: string }>("POST", "/sessions", {
      scene_id: sceneId,
    });
    return doc.session_id;
  }

  query(sessionId: string, text: string): Promise<QueryResponse> {
    return this.request("POST", `/sessions/${sessionId}/query`, { text });
  }

  feedback(sessionId: string, text: string): Promise<QueryResponse> {
    return this.request("POST", `/sessions/${sessionId}/feedback`, { text });
  }

  trace(sessionId: string): Promise<TraceDoc> {
    return this.request("GET", `/sessions/${sessionId}/trace`);
  }

  /** True iff the exact string occurs in some response body received so far. */
  cameFromServer(fragment: string): boolean {
    return this.received.some((body) => body.includes(fragment));
  }
}
