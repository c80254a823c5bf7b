/** Search state container.
 *
 * Candidates are shown exactly as received (no client-side re-ranking).
 * Only one search is authoritative at a time: every request gets a
 * sequence number and responses arriving for a superseded request are
 * discarded.
 */

import { ApiClient, ApiError, SearchResponse, Verdict } from "./api.js";

export type Status = "idle" | "loading" | "ready" | "error";

export interface SearchState {
  query: string;
  page: number;
  status: Status;
  response: SearchResponse | null;
  error: string | null;
  verdicts: ReadonlyMap<string, Verdict>;
  toast: string | null;
}

export type Listener = (state: SearchState) => void;

export class SearchStore {
  private seq = 0;
  private listeners: Listener[] = [];
  private verdictMap = new Map<string, Verdict>();

  state: SearchState = {
    query: "",
    page: 0,
    status: "idle",
    response: null,
    error: null,
    verdicts: new Map(),
    toast: null,
  };

  constructor(private api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(patch: Partial<SearchState>): void {
    this.state = { ...this.state, verdicts: new Map(this.verdictMap), ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Issue a search; page defaults to 0 and is clamped non-negative. */
  async search(query: string, page = 0): Promise<void> {
    const trimmed = query.trim();
    if (!trimmed) {
      this.emit({ toast: "enter a query first" });
      return;
    }
    const requested = Math.max(0, page);
    const ticket = ++this.seq;
    this.emit({ query: trimmed, page: requested, status: "loading", error: null, toast: null });
    try {
      const response = await this.api.search(trimmed, requested);
      if (ticket !== this.seq) return; // superseded by a newer search
      this.emit({ status: "ready", response, error: null });
    } catch (error) {
      if (ticket !== this.seq) return;
      const message = error instanceof ApiError ? error.message : "service unreachable";
      this.emit({ status: "error", response: null, error: message });
    }
  }

  /** Refining the query always starts from the first page. */
  async refine(query: string): Promise<void> {
    await this.search(query, 0);
  }

  async nextPage(): Promise<void> {
    if (this.state.query) await this.search(this.state.query, this.state.page + 1);
  }

  async previousPage(): Promise<void> {
    if (this.state.query && this.state.page > 0) {
      await this.search(this.state.query, this.state.page - 1);
    }
  }

  verdictFor(candidateId: string): Verdict | undefined {
    return this.verdictMap.get(candidateId);
  }

  /** Send feedback; the verdict is only recorded once the service accepts it. */
  async sendFeedback(candidateId: string, verdict: Verdict): Promise<void> {
    try {
      await this.api.feedback(this.state.query, candidateId, verdict);
      this.verdictMap.set(candidateId, verdict);
      this.emit({ toast: null });
    } catch (error) {
      const message = error instanceof ApiError ? error.message : "feedback not recorded";
      this.emit({ toast: message });
    }
  }
}
