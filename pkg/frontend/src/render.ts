/** DOM rendering: candidate cards, snippet tables, schema panels. */

import { CandidateView, Snippet, TableDetail, TableSummary, Verdict } from "./api.js";
import { highlightSql } from "./highlight.js";
import { SearchState } from "./state.js";

export interface CardHooks {
  verdictFor(candidateId: string): Verdict | undefined;
  onFeedback(candidateId: string, verdict: Verdict): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderSnippet(doc: Document, snippet: Snippet): HTMLTableElement {
  const table = el(doc, "table", "snippet");
  const head = doc.createElement("thead");
  const headRow = doc.createElement("tr");
  for (const column of snippet.columns) {
    headRow.appendChild(el(doc, "th", undefined, column));
  }
  head.appendChild(headRow);
  table.appendChild(head);
  const body = doc.createElement("tbody");
  for (const row of snippet.rows) {
    const tr = doc.createElement("tr");
    for (const value of row) {
      tr.appendChild(el(doc, "td", undefined, value === null ? "∅" : String(value)));
    }
    body.appendChild(tr);
  }
  table.appendChild(body);
  return table;
}

export function renderCandidate(
  doc: Document,
  candidate: CandidateView,
  hooks: CardHooks,
): HTMLElement {
  const card = el(doc, "article", "candidate");
  card.dataset.id = candidate.id;
  card.dataset.rank = String(candidate.rank);

  const header = el(doc, "header");
  header.appendChild(el(doc, "span", "rank", `#${candidate.rank}`));
  header.appendChild(el(doc, "span", "score", `score ${candidate.score.toFixed(3)}`));

  const buttons = el(doc, "span", "feedback");
  for (const verdict of ["like", "dislike"] as Verdict[]) {
    const button = el(doc, "button", `verdict ${verdict}`,
                      verdict === "like" ? "▲ like" : "▼ dislike");
    button.type = "button";
    if (hooks.verdictFor(candidate.id) === verdict) button.classList.add("chosen");
    button.addEventListener("click", () => hooks.onFeedback(candidate.id, verdict));
    buttons.appendChild(button);
  }
  header.appendChild(buttons);
  card.appendChild(header);

  const entries = el(doc, "ul", "entries");
  for (const entry of candidate.entryPoints) {
    entries.appendChild(el(doc, "li", undefined, entry));
  }
  card.appendChild(entries);

  if (candidate.sql) {
    const pre = el(doc, "pre", "sql");
    pre.innerHTML = highlightSql(candidate.sql);
    card.appendChild(pre);
  }
  for (const diagnostic of candidate.diagnostics) {
    card.appendChild(el(doc, "p", "diagnostic", diagnostic));
  }
  if (candidate.snippet && candidate.snippet.rows.length) {
    const caption = el(doc, "p", "snippet-caption",
                       `snippet, ${candidate.snippet.rows.length} rows`);
    card.appendChild(caption);
    card.appendChild(renderSnippet(doc, candidate.snippet));
  } else if (candidate.snippet) {
    card.appendChild(el(doc, "p", "snippet-caption", "no rows"));
  }
  return card;
}

export function renderResults(
  doc: Document,
  container: HTMLElement,
  state: SearchState,
  hooks: CardHooks,
): void {
  container.textContent = "";
  if (state.status === "idle") {
    container.appendChild(el(doc, "p", "hint",
                             "search the warehouse with keywords and operators"));
    return;
  }
  if (state.status === "loading") {
    container.appendChild(el(doc, "p", "hint", "searching…"));
    return;
  }
  if (state.status === "error") {
    const banner = el(doc, "div", "error-banner");
    banner.appendChild(el(doc, "strong", undefined, "search failed: "));
    banner.appendChild(el(doc, "span", undefined, state.error ?? "unknown error"));
    container.appendChild(banner);
    return;
  }
  const response = state.response!;
  const summary = el(doc, "p", "summary",
    `complexity ${response.complexity} · ${response.interpretations} ` +
    `interpretations · page ${response.page + 1} · ` +
    `${response.elapsedSeconds.toFixed(2)}s`);
  container.appendChild(summary);
  for (const diagnostic of response.diagnostics) {
    container.appendChild(el(doc, "p", "diagnostic", diagnostic));
  }
  if (!response.candidates.length) {
    container.appendChild(el(doc, "p", "empty",
      response.page > 0 ? "no more results on this page" : "no results"));
    return;
  }
  for (const candidate of response.candidates) {
    container.appendChild(renderCandidate(doc, candidate, hooks));
  }
}

export function renderSchemaList(
  doc: Document,
  container: HTMLElement,
  tables: TableSummary[],
  onOpen: (name: string) => void,
): void {
  container.textContent = "";
  container.appendChild(el(doc, "h2", undefined, "schema"));
  const list = el(doc, "ul", "schema-tables");
  for (const table of tables) {
    const item = doc.createElement("li");
    const link = el(doc, "a", "table-link", table.name);
    link.href = `?table=${encodeURIComponent(table.name)}`;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onOpen(table.name);
    });
    item.appendChild(link);
    item.appendChild(el(doc, "span", "meta",
                        ` ${table.columnCount} columns, ${table.neighborCount} links`));
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderSchemaDetail(
  doc: Document,
  container: HTMLElement,
  detail: TableDetail,
  onOpen: (name: string) => void,
  onBack: () => void,
): void {
  container.textContent = "";
  const back = el(doc, "a", "back", "← all tables");
  back.href = "?";
  back.addEventListener("click", (event) => {
    event.preventDefault();
    onBack();
  });
  container.appendChild(back);
  container.appendChild(el(doc, "h2", undefined, detail.name));
  const columns = el(doc, "ul", "columns");
  for (const column of detail.columns) {
    columns.appendChild(el(doc, "li", undefined, `${column.name}: ${column.datatype}`));
  }
  container.appendChild(columns);
  container.appendChild(el(doc, "h3", undefined, "joins & inheritance"));
  const neighbors = el(doc, "ul", "neighbors");
  for (const neighbor of detail.neighbors) {
    const item = doc.createElement("li");
    const link = el(doc, "a", "table-link", neighbor.table);
    link.href = `?table=${encodeURIComponent(neighbor.table)}`;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onOpen(neighbor.table);
    });
    item.appendChild(link);
    item.appendChild(el(doc, "span", "meta", ` (${neighbor.kind})`));
    neighbors.appendChild(item);
  }
  container.appendChild(neighbors);
}

export function renderSchemaMissing(doc: Document, container: HTMLElement,
                                    name: string, onBack: () => void): void {
  container.textContent = "";
  container.appendChild(el(doc, "p", "not-found", `no table named “${name}”`));
  const back = el(doc, "a", "back", "← all tables");
  back.href = "?";
  back.addEventListener("click", (event) => {
    event.preventDefault();
    onBack();
  });
  container.appendChild(back);
}
