/** API-level contract tests against the real service. */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { TestServer, feedbackRecords, startServer } from "./server.js";

const QUERY1_SQL = [
  "SELECT *",
  "FROM parties, individuals",
  "WHERE parties.id = individuals.id",
  "AND individuals.firstName = 'Sara'",
  "AND individuals.lastName = 'Guttinger'",
].join("\n");

let server: TestServer;
let api: ApiClient;

beforeAll(async () => {
  server = await startServer();
  api = new ApiClient(server.baseUrl, (input, init) => fetch(input, init));
}, 60000);

afterAll(async () => {
  await server.stop();
});

describe("search contract", () => {
  it("returns rank-ordered candidates with the exact rendered SQL", async () => {
    const response = await api.search("Sara Guttinger", 0);
    expect(response.complexity).toBe(1);
    expect(response.candidates.map((c) => c.rank)).toEqual(
      response.candidates.map((_, i) => i + 1));
    expect(response.candidates[0].sql).toBe(QUERY1_SQL);
    expect(response.candidates[0].snippet!.rows).toHaveLength(1);
  });

  it("is deterministic modulo timing", async () => {
    const a = await api.search("customers Zurich financial instruments", 0);
    const b = await api.search("customers Zurich financial instruments", 0);
    expect(a.candidates.map((c) => c.id)).toEqual(b.candidates.map((c) => c.id));
    expect(a.complexity).toBe(2);
  });

  it("rejects unparsable queries with a grammar diagnostic", async () => {
    await expect(api.search("", 0)).rejects.toMatchObject({
      status: 400,
    } satisfies Partial<ApiError>);
  });

  it("pages past the end are empty, not errors", async () => {
    const response = await api.search("Sara Guttinger", 7);
    expect(response.candidates).toEqual([]);
  });
});

describe("feedback contract", () => {
  it("appends one record per accepted verdict", async () => {
    const before = feedbackRecords(server.feedbackLog).length;
    await api.feedback("Sara Guttinger", "cand-1", "like");
    await api.feedback("Sara Guttinger", "cand-1", "dislike");
    const records = feedbackRecords(server.feedbackLog);
    expect(records).toHaveLength(before + 2); // append-only, both kept
    expect(records.at(-1)).toMatchObject({
      candidateId: "cand-1",
      verdict: "dislike",
      query: "Sara Guttinger",
    });
  });

  it("rejects unknown verdicts", async () => {
    await expect(
      api.feedback("x", "cand-1", "maybe" as never),
    ).rejects.toMatchObject({ status: 400 });
  });
});

describe("schema contract", () => {
  it("lists the eight tables", async () => {
    const tables = await api.tables();
    expect(tables).toHaveLength(8);
    expect(tables.map((t) => t.name)).toContain("parties");
  });

  it("serves table details with join and inheritance neighbors", async () => {
    const detail = await api.table("parties");
    expect(detail.columns.map((c) => c.name)).toEqual(["id", "type"]);
    const kinds = detail.neighbors.map((n) => [n.table, n.kind]);
    expect(kinds).toContainEqual(["individuals", "inheritance-child"]);
    expect(kinds).toContainEqual(["organizations", "inheritance-child"]);
  });

  it("404s for unknown tables", async () => {
    await expect(api.table("nope")).rejects.toMatchObject({ status: 404 });
  });
});
