/** Read-only SQL highlighting.
 *
 * The statement is split into string literals, numbers, keywords and the
 * rest, each wrapped in a span; concatenated text content stays byte-equal
 * to the input (the UI must show exactly the SQL the service rendered).
 */

const KEYWORDS = new Set([
  "select", "from", "where", "and", "or", "group", "by", "order",
  "limit", "asc", "desc", "like", "date", "sum", "count",
]);

const TOKEN = /('(?:[^']|'')*')|(\b\d+(?:\.\d+)?\b)|([A-Za-z_][A-Za-z_0-9.]*)/g;

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function highlightSql(sql: string): string {
  let html = "";
  let last = 0;
  for (const match of sql.matchAll(TOKEN)) {
    const index = match.index ?? 0;
    html += escapeHtml(sql.slice(last, index));
    const [text, str, num, name] = match;
    if (str !== undefined) {
      html += `<span class="sql-str">${escapeHtml(text)}</span>`;
    } else if (num !== undefined) {
      html += `<span class="sql-num">${escapeHtml(text)}</span>`;
    } else if (name !== undefined && KEYWORDS.has(name.toLowerCase())) {
      html += `<span class="sql-kw">${escapeHtml(text)}</span>`;
    } else {
      html += escapeHtml(text);
    }
    last = index + text.length;
  }
  html += escapeHtml(sql.slice(last));
  return html;
}
