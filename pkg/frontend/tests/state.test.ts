import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, SearchResponse, Verdict } from "../src/api.js";
import { SearchStore } from "../src/state.js";

function response(query: string, page: number, marker: string): SearchResponse {
  return {
    query, page,
    complexity: 1,
    interpretations: 1,
    diagnostics: [],
    elapsedSeconds: 0,
    candidates: [{
      id: marker, rank: 1, score: 0.5, sql: `SELECT * FROM ${marker}`,
      tables: [marker], joins: [], filters: [], entryPoints: [],
      snippet: null, diagnostics: [],
    }],
  };
}

type Resolver = (r: SearchResponse) => void;

class FakeApi extends ApiClient {
  pending: Array<{ query: string; page: number; resolve: Resolver;
                   reject: (e: unknown) => void }> = [];
  feedbackCalls: Array<{ candidateId: string; verdict: Verdict }> = [];
  failFeedback = false;

  constructor() {
    super("", undefined as unknown as typeof fetch);
  }

  override search(query: string, page: number): Promise<SearchResponse> {
    return new Promise((resolve, reject) => {
      this.pending.push({ query, page, resolve, reject });
    });
  }

  override async feedback(_query: string, candidateId: string,
                          verdict: Verdict): Promise<void> {
    if (this.failFeedback) throw new ApiError(400, "bad verdict");
    this.feedbackCalls.push({ candidateId, verdict });
  }
}

describe("SearchStore", () => {
  it("drops responses of superseded searches", async () => {
    const api = new FakeApi();
    const store = new SearchStore(api);
    const first = store.search("first");
    const second = store.search("second");
    expect(api.pending).toHaveLength(2);
    // the late answer to the first request must not win
    api.pending[1].resolve(response("second", 0, "B"));
    await second;
    api.pending[0].resolve(response("first", 0, "A"));
    await first;
    expect(store.state.status).toBe("ready");
    expect(store.state.response!.candidates[0].id).toBe("B");
  });

  it("refine resets pagination to the first page", async () => {
    const api = new FakeApi();
    const store = new SearchStore(api);
    const search = store.search("q", 3);
    api.pending[0].resolve(response("q", 3, "A"));
    await search;
    expect(store.state.page).toBe(3);
    const refined = store.refine("q two");
    expect(api.pending[1].page).toBe(0);
    api.pending[1].resolve(response("q two", 0, "C"));
    await refined;
    expect(store.state.page).toBe(0);
  });

  it("clamps pages to zero and ignores prev on the first page", async () => {
    const api = new FakeApi();
    const store = new SearchStore(api);
    const search = store.search("q", -4);
    expect(api.pending[0].page).toBe(0);
    api.pending[0].resolve(response("q", 0, "A"));
    await search;
    await store.previousPage();
    expect(api.pending).toHaveLength(1); // no extra request
  });

  it("empty queries are blocked client-side", async () => {
    const api = new FakeApi();
    const store = new SearchStore(api);
    await store.search("   ");
    expect(api.pending).toHaveLength(0);
    expect(store.state.toast).toContain("query");
  });

  it("records verdicts only when the service accepted them", async () => {
    const api = new FakeApi();
    const store = new SearchStore(api);
    await store.sendFeedback("abc", "like");
    expect(store.verdictFor("abc")).toBe("like");
    api.failFeedback = true;
    await store.sendFeedback("def", "dislike");
    expect(store.verdictFor("def")).toBeUndefined();
    expect(store.state.toast).toBe("bad verdict");
  });

  it("search failures surface as error state", async () => {
    const api = new FakeApi();
    const store = new SearchStore(api);
    const search = store.search("q");
    api.pending[0].reject(new ApiError(400, "empty query"));
    await search;
    expect(store.state.status).toBe("error");
    expect(store.state.error).toBe("empty query");
  });
});
