/** Typed client of the wirewalk session API. */

import {
  SCHEMA_VERSION,
  type AcceptResponse,
  type ExportResponse,
  type ImagePoint,
  type RunResponse,
  type SeedsResponse,
  type SessionCreated,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  async createSession(imageBytes: Blob | ArrayBuffer): Promise<SessionCreated> {
    return this.request<SessionCreated>("POST", "/session", imageBytes, "image/png");
  }

  async postSeeds(sessionId: string, seeds: ImagePoint[]): Promise<SeedsResponse> {
    const body = JSON.stringify({
      version: SCHEMA_VERSION,
      seeds: seeds.map((p) => ({ x: p.x, y: p.y })),
    });
    return this.request<SeedsResponse>("POST", `/session/${sessionId}/seeds`, body);
  }

  async run(sessionId: string): Promise<RunResponse> {
    return this.request<RunResponse>("POST", `/session/${sessionId}/run`);
  }

  async accept(sessionId: string, accepted: number[]): Promise<AcceptResponse> {
    const body = JSON.stringify({ version: SCHEMA_VERSION, accepted });
    return this.request<AcceptResponse>("POST", `/session/${sessionId}/accept`, body);
  }

  async export(sessionId: string): Promise<ExportResponse> {
    return this.request<ExportResponse>("GET", `/session/${sessionId}/export`);
  }

  private async request<T extends { version: number }>(
    method: string,
    path: string,
    body?: BodyInit,
    contentType = "application/json",
  ): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      body,
      headers: body !== undefined ? { "Content-Type": contentType } : undefined,
    });
    const doc = (await response.json()) as T & { error?: string };
    if (!response.ok) {
      throw new ApiError(response.status, doc.error ?? `HTTP ${response.status}`);
    }
    if (doc.version !== SCHEMA_VERSION) {
      throw new ApiError(500, `unsupported schema version ${doc.version}`);
    }
    return doc;
  }
}
