/** Application wiring: layout, events, URL parameters.
 *
 * The page is shareable: query, page and the open schema table live in the
 * URL (?q=…&page=…&table=…).  Everything on screen comes from /search and
 * /schema responses in their original order.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  renderResults, renderSchemaDetail, renderSchemaList, renderSchemaMissing,
} from "./render.js";
import { SearchStore } from "./state.js";

export interface App {
  store: SearchStore;
  openTable(name: string | null): Promise<void>;
}

const LAYOUT = `
  <header class="top">
    <h1>warehouse search</h1>
    <form id="search-form">
      <input id="search-input" type="text" autocomplete="off"
             placeholder="e.g. Sara Guttinger · sum (amount) group by (transaction date)" />
      <button type="submit">search</button>
    </form>
    <nav class="pager">
      <button id="prev-page" type="button">← prev</button>
      <span id="page-label"></span>
      <button id="next-page" type="button">next →</button>
    </nav>
  </header>
  <div id="toast" class="toast" hidden></div>
  <main id="results"></main>
  <aside id="schema"></aside>
`;

export function initApp(doc: Document, apiBase = "",
                        fetchFn: typeof fetch = fetch): App {
  const api = new ApiClient(apiBase, fetchFn);
  const store = new SearchStore(api);

  const root = doc.getElementById("app") ?? doc.body;
  root.innerHTML = LAYOUT;
  const form = doc.getElementById("search-form") as HTMLFormElement;
  const input = doc.getElementById("search-input") as HTMLInputElement;
  const results = doc.getElementById("results") as HTMLElement;
  const schemaPanel = doc.getElementById("schema") as HTMLElement;
  const toast = doc.getElementById("toast") as HTMLElement;
  const pageLabel = doc.getElementById("page-label") as HTMLElement;
  const prev = doc.getElementById("prev-page") as HTMLButtonElement;
  const next = doc.getElementById("next-page") as HTMLButtonElement;

  let openTableName: string | null = null;

  function syncUrl(): void {
    const params = new URLSearchParams();
    if (store.state.query) params.set("q", store.state.query);
    if (store.state.page > 0) params.set("page", String(store.state.page));
    if (openTableName) params.set("table", openTableName);
    const search = params.toString();
    const url = doc.location.pathname + (search ? `?${search}` : "");
    doc.defaultView?.history.replaceState(null, "", url);
  }

  store.subscribe((state) => {
    renderResults(doc, results, state, {
      verdictFor: (id) => store.verdictFor(id),
      onFeedback: (id, verdict) => void store.sendFeedback(id, verdict),
    });
    pageLabel.textContent = `page ${state.page + 1}`;
    prev.disabled = state.page === 0;
    next.disabled = state.status !== "ready";
    if (state.toast) {
      toast.textContent = state.toast;
      toast.hidden = false;
    } else {
      toast.hidden = true;
    }
    syncUrl();
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!input.value.trim()) return; // refining to empty is blocked client-side
    void store.refine(input.value);
  });
  prev.addEventListener("click", () => void store.previousPage());
  next.addEventListener("click", () => void store.nextPage());

  async function openTable(name: string | null): Promise<void> {
    openTableName = name;
    try {
      if (name === null) {
        const tables = await api.tables();
        renderSchemaList(doc, schemaPanel, tables, (t) => void openTable(t));
      } else {
        const detail = await api.table(name);
        renderSchemaDetail(doc, schemaPanel, detail,
                           (t) => void openTable(t),
                           () => void openTable(null));
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 404 && name !== null) {
        renderSchemaMissing(doc, schemaPanel, name, () => void openTable(null));
      } else {
        schemaPanel.textContent = "schema unavailable";
      }
    }
    syncUrl();
  }

  // restore state from the URL
  const params = new URLSearchParams(doc.location.search);
  const initialQuery = params.get("q");
  const initialPage = Math.max(0, Number(params.get("page") ?? "0") || 0);
  const initialTable = params.get("table");
  if (initialQuery) {
    input.value = initialQuery;
    void store.search(initialQuery, initialPage);
  }
  void openTable(initialTable);

  return { store, openTable };
}
