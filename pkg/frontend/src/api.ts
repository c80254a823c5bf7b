/** Typed client for the search service JSON API. */

export interface Snippet {
  columns: string[];
  rows: (string | number | null)[][];
}

export interface CandidateView {
  id: string;
  rank: number;
  score: number;
  sql: string | null;
  tables: string[];
  joins: string[];
  filters: string[];
  entryPoints: string[];
  snippet: Snippet | null;
  diagnostics: string[];
}

export interface SearchResponse {
  query: string;
  page: number;
  complexity: number;
  interpretations: number;
  diagnostics: string[];
  elapsedSeconds: number;
  candidates: CandidateView[];
}

export interface TableSummary {
  name: string;
  columnCount: number;
  neighborCount: number;
}

export interface TableDetail {
  name: string;
  columns: { name: string; datatype: string }[];
  neighbors: { table: string; kind: string; via: string }[];
}

export type Verdict = "like" | "dislike";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function fail(response: Response): Promise<never> {
  let detail = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    private base = "",
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async post(path: string, body: unknown): Promise<Response> {
    return this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async search(query: string, page: number): Promise<SearchResponse> {
    const response = await this.post("/search", { query, page });
    if (!response.ok) await fail(response);
    return (await response.json()) as SearchResponse;
  }

  async feedback(query: string, candidateId: string, verdict: Verdict): Promise<void> {
    const response = await this.post("/feedback", { query, candidateId, verdict });
    if (!response.ok) await fail(response);
  }

  async tables(): Promise<TableSummary[]> {
    const response = await this.fetchFn(this.base + "/schema/tables");
    if (!response.ok) await fail(response);
    return (await response.json()) as TableSummary[];
  }

  async table(name: string): Promise<TableDetail> {
    const response = await this.fetchFn(
      this.base + "/schema/table/" + encodeURIComponent(name),
    );
    if (!response.ok) await fail(response);
    return (await response.json()) as TableDetail;
  }
}
