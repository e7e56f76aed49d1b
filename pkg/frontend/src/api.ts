import type {
  ErrorBody,
  FinalizeResponse,
  HealthResponse,
  NoteJson,
  QueryResponse,
  SegmentInput,
  SessionCreated,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly stage?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the service endpoints; does no interpretation
 * beyond JSON decoding, so error messages surface verbatim. */
export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (response.status === 204) {
      return undefined as T;
    }
    const payload = await response.json();
    if (!response.ok) {
      const err = payload as ErrorBody;
      throw new ApiError(
        response.status,
        err.error?.code ?? "unknown",
        err.error?.message ?? `HTTP ${response.status}`,
        err.error?.stage,
      );
    }
    return payload as T;
  }

  createSession(): Promise<SessionCreated> {
    return this.request<SessionCreated>("POST", "/v1/sessions");
  }

  addSegment(sessionId: string, segment: SegmentInput): Promise<void> {
    return this.request<void>("POST", `/v1/sessions/${sessionId}/segments`, segment);
  }

  finalizeSession(sessionId: string): Promise<FinalizeResponse> {
    return this.request<FinalizeResponse>("POST", `/v1/sessions/${sessionId}/finalize`);
  }

  query(queryText: string, k?: number): Promise<QueryResponse> {
    const body: Record<string, unknown> = { query: queryText };
    if (k !== undefined) {
      body.k = k;
    }
    return this.request<QueryResponse>("POST", "/v1/query", body);
  }

  getNote(noteId: string): Promise<NoteJson> {
    return this.request<NoteJson>("GET", `/v1/notes/${noteId}`);
  }

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>("GET", "/v1/health");
  }
}
