/** Thin client for the service's documented HTTP/SSE API. */

import { readEventStream } from "./sse.js";
import type {
  CorpusView,
  HistoryEntry,
  IngestReport,
  StreamEvent,
} from "./types.js";

export interface ClientConfig {
  baseUrl: string;
  token?: string;
}

/** Carries the service's error code and verbatim detail message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

export class RagApi {
  constructor(private readonly config: ClientConfig) {}

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    const headers: Record<string, string> = { ...extra };
    if (this.config.token) {
      headers["Authorization"] = `Bearer ${this.config.token}`;
    }
    return headers;
  }

  private url(path: string): string {
    return this.config.baseUrl.replace(/\/$/, "") + path;
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const response = await fetch(this.url(path), {
      ...init,
      headers: this.headers((init.headers as Record<string, string>) ?? {}),
    });
    if (!response.ok) {
      let code = `HTTP ${response.status}`;
      let detail = response.statusText;
      try {
        const body = await response.json();
        code = body.error ?? code;
        detail = body.detail ?? JSON.stringify(body);
      } catch {
        // not JSON; keep the status text
      }
      throw new ApiError(response.status, code, detail);
    }
    return (await response.json()) as T;
  }

  async listCorpora(): Promise<CorpusView[]> {
    const body = await this.request<{ corpora: CorpusView[] }>("/corpora");
    return body.corpora;
  }

  createCorpus(name: string): Promise<CorpusView> {
    return this.request("/corpora", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ name }),
    });
  }

  uploadManifest(name: string, jsonl: string): Promise<IngestReport> {
    return this.request(`/corpora/${name}/documents`, {
      method: "POST",
      headers: { "Content-Type": "application/x-ndjson" },
      body: jsonl,
    });
  }

  uploadFiles(name: string, files: File[]): Promise<IngestReport> {
    const form = new FormData();
    for (const file of files) {
      form.append("files", file);
    }
    return this.request(`/corpora/${name}/documents`, {
      method: "POST",
      body: form,
    });
  }

  vectorize(
    name: string,
    chunkSize?: number,
    overlap?: number,
  ): Promise<{ count: number; dim: number }> {
    return this.request(`/corpora/${name}/vectorize`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        ...(chunkSize !== undefined ? { chunk_size: chunkSize } : {}),
        ...(overlap !== undefined ? { overlap } : {}),
      }),
    });
  }

  async createSession(corpus: string): Promise<string> {
    const body = await this.request<{ session_id: string }>("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ corpus }),
    });
    return body.session_id;
  }

  async history(sessionId: string): Promise<HistoryEntry[]> {
    const body = await this.request<{ history: HistoryEntry[] }>(
      `/sessions/${sessionId}/history`,
    );
    return body.history;
  }

  async submitQuery(
    sessionId: string,
    text: string,
    options: { topN?: number; minScore?: number } = {},
  ): Promise<number> {
    const body = await this.request<{ job_id: number }>(
      `/sessions/${sessionId}/query`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({
          text,
          ...(options.topN !== undefined ? { top_n: options.topN } : {}),
          ...(options.minScore !== undefined ? { min_score: options.minScore } : {}),
        }),
      },
    );
    return body.job_id;
  }

  /** Stream a job's events until done/failed. */
  async *streamJob(jobId: number): AsyncGenerator<StreamEvent> {
    const response = await fetch(this.url(`/jobs/${jobId}/stream`), {
      headers: this.headers(),
    });
    if (!response.ok) {
      throw new ApiError(response.status, `HTTP ${response.status}`, "stream failed");
    }
    yield* readEventStream(response);
  }
}
