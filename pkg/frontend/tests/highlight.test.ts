/** @vitest-environment jsdom */
import { describe, expect, it } from "vitest";

import { highlightSql } from "../src/highlight.js";

const QUERY1 = [
  "SELECT *",
  "FROM parties, individuals",
  "WHERE parties.id = individuals.id",
  "AND individuals.firstName = 'Sara'",
  "AND individuals.lastName = 'Guttinger'",
].join("\n");

describe("highlightSql", () => {
  it("keeps the displayed text byte-equal to the statement", () => {
    const pre = document.createElement("pre");
    pre.innerHTML = highlightSql(QUERY1);
    expect(pre.textContent).toBe(QUERY1);
  });

  it("wraps keywords, strings and numbers", () => {
    const pre = document.createElement("pre");
    pre.innerHTML = highlightSql("SELECT count(*) FROM t WHERE a = 'x' AND b >= 5");
    const keywords = [...pre.querySelectorAll(".sql-kw")].map((e) => e.textContent);
    expect(keywords).toEqual(["SELECT", "count", "FROM", "WHERE", "AND"]);
    expect(pre.querySelector(".sql-str")!.textContent).toBe("'x'");
    expect(pre.querySelector(".sql-num")!.textContent).toBe("5");
  });

  it("escapes markup instead of injecting it", () => {
    const pre = document.createElement("pre");
    pre.innerHTML = highlightSql("SELECT * FROM t WHERE a = '<script>alert(1)</script>'");
    expect(pre.querySelector("script")).toBeNull();
    expect(pre.textContent).toContain("<script>");
  });

  it("quotes with doubled apostrophes stay one literal", () => {
    const pre = document.createElement("pre");
    pre.innerHTML = highlightSql("WHERE name = 'O''Hara'");
    expect(pre.querySelector(".sql-str")!.textContent).toBe("'O''Hara'");
  });
});
