/**
 * Typed client for the retrieval service API.
 *
 * The fetch implementation is injectable so component tests can run against
 * a recorded mock of the service.
 */

export interface PreviewItem {
  index: number;
  id: string | null;
  distance: number;
}

export interface ClusterCard {
  id: number;
  size: number;
  previews: PreviewItem[];
}

export interface QueryParams {
  m?: number;
  eta?: number;
  cap?: number;
  r?: number;
  seed?: number;
}

export interface QueryResponse {
  session_id: string;
  k: number;
  clusters: ClusterCard[];
  eigengap: number[];
  params: { m: number; eta: number; cap: number; r: number; seed: number };
}

export interface RankedItem {
  index: number;
  id: string | null;
  delta: number;
  sigma: number;
  delta_tilde: number;
}

export interface FeedbackResponse {
  total: number;
  offset: number;
  items: RankedItem[];
}

export interface FeedbackRequest {
  selected: number[];
  offset: number;
  limit: number;
  gamma?: number;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(res: Response): Promise<ApiError> {
  let detail = res.statusText;
  try {
    const body = (await res.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(res.status, detail);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw await parseError(res);
    return (await res.json()) as T;
  }

  async health(): Promise<{ status: string; items: number; dim: number }> {
    const res = await this.fetchImpl(`${this.baseUrl}/api/health`);
    if (!res.ok) throw await parseError(res);
    return res.json();
  }

  query(body: {
    item_index?: number;
    vector?: number[];
    params?: QueryParams;
  }): Promise<QueryResponse> {
    return this.post("/api/query", body);
  }

  feedback(sessionId: string, body: FeedbackRequest): Promise<FeedbackResponse> {
    return this.post(`/api/sessions/${sessionId}/feedback`, body);
  }

  imageUrl(index: number): string {
    return `${this.baseUrl}/api/images/${index}`;
  }
}
