/** Typed client for the session API. Fetch is injectable for tests. */

export interface ScoreRow {
  class_id: number;
  label: string;
  probability: number;
}

export interface Scores {
  topk: ScoreRow[];
}

export interface SessionResponse {
  session_id: string;
  width: number;
  height: number;
  image: string; // base64 PNG of the current image
  scores: Scores;
  original_scores: Scores;
  history_depth: number;
  history_empty?: boolean;
  original?: string;
}

export interface InpaintParams {
  radius?: number;
  patch_size?: number;
  iterations?: number;
  rng_seed?: number;
}

export type Algorithm = "telea" | "patchmatch";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? "{}" : JSON.stringify(body),
    });
  }

  createSession(imageB64: string): Promise<SessionResponse> {
    return this.post("/api/session", { image: imageB64 });
  }

  getSession(id: string): Promise<SessionResponse> {
    return this.request(`/api/session/${id}`);
  }

  inpaint(
    id: string,
    maskB64: string,
    algorithm: Algorithm,
    params?: InpaintParams,
  ): Promise<SessionResponse> {
    return this.post(`/api/session/${id}/inpaint`, { mask: maskB64, algorithm, params });
  }

  undo(id: string): Promise<SessionResponse> {
    return this.post(`/api/session/${id}/undo`);
  }

  reset(id: string): Promise<SessionResponse> {
    return this.post(`/api/session/${id}/reset`);
  }

  labels(): Promise<{ labels: string[] }> {
    return this.request("/api/labels");
  }

  camUrl(id: string, classId: number, mode: "overlay" | "raw", alpha: number): string {
    return `${this.base}/api/session/${id}/cam?class=${classId}&mode=${mode}&alpha=${alpha}`;
  }
}
