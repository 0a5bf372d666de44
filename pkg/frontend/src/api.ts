// REST + NDJSON streaming client for the grounding service.

import type { Goal, LocalizeResponse, StreamEvent } from "./types";

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.url(path), init);
    if (!resp.ok) throw new Error(`${path}: HTTP ${resp.status}`);
    return (await resp.json()) as T;
  }

  async createSession(): Promise<string> {
    const body = await this.json<{ id: string }>("/sessions", { method: "POST" });
    return body.id;
  }

  async getTags(): Promise<string[]> {
    return (await this.json<{ tags: string[] }>("/map/tags")).tags;
  }

  async getGoal(sessionId: string): Promise<Goal | null> {
    return (await this.json<{ goal: Goal | null }>(`/sessions/${sessionId}/goal`)).goal;
  }

  async getSystemPrompt(sessionId: string): Promise<string> {
    const body = await this.json<{ messages: { role: string; content: string }[] }>(
      `/sessions/${sessionId}`,
    );
    const system = body.messages.find((m) => m.role === "system");
    return system?.content ?? "";
  }

  async localize(tag: string): Promise<LocalizeResponse> {
    return this.json<LocalizeResponse>(`/map/localize?tag=${encodeURIComponent(tag)}`);
  }

  /** Fetch the scene mesh; null when the server has none (404). */
  async fetchMesh(): Promise<ArrayBuffer | null> {
    const resp = await this.fetchImpl(this.url("/scene/mesh"));
    if (resp.status === 404) return null;
    if (!resp.ok) throw new Error(`/scene/mesh: HTTP ${resp.status}`);
    return resp.arrayBuffer();
  }

  /**
   * Send one user message and forward each NDJSON event as it arrives.
   * Throws if the stream breaks mid-turn; the caller flags the partial
   * transcript and offers a retry.
   */
  async streamMessage(
    sessionId: string,
    text: string,
    onEvent: (event: StreamEvent) => void,
  ): Promise<void> {
    const resp = await this.fetchImpl(this.url(`/sessions/${sessionId}/message`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
    if (!resp.ok) throw new Error(`message: HTTP ${resp.status}`);
    if (!resp.body) throw new Error("message: response has no body stream");

    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    const emit = (line: string) => {
      const trimmed = line.trim();
      if (trimmed) onEvent(JSON.parse(trimmed) as StreamEvent);
    };
    for (;;) {
      const { value, done } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let nl;
      while ((nl = buffer.indexOf("\n")) >= 0) {
        emit(buffer.slice(0, nl));
        buffer = buffer.slice(nl + 1);
      }
    }
    emit(buffer);
  }
}

/** Service base URL: ?server=... query parameter, else same origin. */
export function resolveServerUrl(location: { origin: string; search: string }): string {
  const params = new URLSearchParams(location.search);
  return params.get("server") ?? location.origin;
}
