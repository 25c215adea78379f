/**
 * Typed client for the recommendation service API.
 *
 * The fetch implementation is injectable so the client can be tested
 * without a network. Server errors are normalized into ApiError with
 * the structured code and message the service returns.
 */

export interface RecommendRequest {
  title: string;
  abstract: string;
  topic_sentence: string;
  k: number;
  max_year?: number | null;
}

export interface ResultRow {
  article_id: string;
  title: string;
  year: number | null;
  distance: number;
  rank: number;
}

export interface RecommendResponse {
  results: ResultRow[];
  model_version: string;
  latency_ms: number;
}

export interface ExplainRequest {
  candidate_id: string;
  query_id?: string;
  title?: string;
  abstract?: string;
  topic_sentence?: string;
  max_year?: number | null;
}

export interface ExplainResponse {
  candidate_id: string;
  candidate_year: number | null;
  query_year: number | null;
  delta_t: number | null;
  jaccard: number;
  distance: number;
  rank: number | null;
  outside_year_filter: boolean;
}

export interface HealthResponse {
  status: string;
  model_version: string;
  pool_size: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }

  /** Server-side failures and network hiccups are worth retrying. */
  get retryable(): boolean {
    return this.status >= 500 || this.status === 0;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    } else if (body && body.detail) {
      message = JSON.stringify(body.detail);
    }
  } catch {
    // keep the generic message
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
        signal,
      });
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") throw err;
      throw new ApiError(0, "network", String(err));
    }
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  recommend(req: RecommendRequest, signal?: AbortSignal): Promise<RecommendResponse> {
    return this.post<RecommendResponse>("/api/v1/recommend", req, signal);
  }

  explain(req: ExplainRequest): Promise<ExplainResponse> {
    return this.post<ExplainResponse>("/api/v1/explain", req);
  }

  async health(): Promise<HealthResponse> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + "/api/v1/health");
    } catch (err) {
      throw new ApiError(0, "network", String(err));
    }
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as HealthResponse;
  }
}
