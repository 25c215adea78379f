/**
 * Pure HTML renderers. No DOM access here, so every piece of markup
 * the app shows can be asserted on in Node tests.
 */

import { ExplainResponse, ResultRow } from "./api.js";
import { HistoryEntry } from "./state.js";

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Result rows in response order; one details toggle per candidate. */
export function renderResults(rows: ResultRow[]): string {
  if (rows.length === 0) {
    return '<p class="empty">No candidates in the pool for this query.</p>';
  }
  const body = rows
    .map(
      (row) => `
  <tr class="result-row" data-candidate="${escapeHtml(row.article_id)}">
    <td class="rank">${row.rank}</td>
    <td class="title">${escapeHtml(row.title)}</td>
    <td class="year">${row.year ?? "?"}</td>
    <td class="distance">${row.distance.toFixed(4)}</td>
    <td><button class="inspect" data-candidate="${escapeHtml(row.article_id)}">details</button></td>
  </tr>
  <tr class="panel-row" data-panel="${escapeHtml(row.article_id)}" hidden>
    <td colspan="5" class="panel-cell"></td>
  </tr>`,
    )
    .join("");
  return `<table class="results">
<thead><tr><th>#</th><th>title</th><th>year</th><th>distance</th><th></th></tr></thead>
<tbody>${body}</tbody>
</table>`;
}

export function renderExplain(explain: ExplainResponse): string {
  const overlapPct = Math.round(explain.jaccard * 100);
  const deltaT = explain.delta_t === null ? "n/a" : String(explain.delta_t);
  const rank = explain.outside_year_filter
    ? '<span class="flag">outside year filter</span>'
    : explain.rank === null
      ? "n/a"
      : String(explain.rank);
  return `<dl class="explain">
  <dt>year gap (&Delta;t)</dt><dd class="delta-t">${deltaT}</dd>
  <dt>token overlap</dt>
  <dd class="jaccard">
    <span class="overlap-bar" style="width: ${overlapPct}%"></span>
    <span class="overlap-value">${explain.jaccard.toFixed(4)}</span>
  </dd>
  <dt>distance</dt><dd class="distance">${explain.distance.toFixed(4)}</dd>
  <dt>rank</dt><dd class="rank">${rank}</dd>
</dl>`;
}

export function renderExplainUnavailable(): string {
  return '<p class="panel-error">candidate unavailable</p>';
}

export function renderError(message: string, retryable: boolean): string {
  const retry = retryable ? ' <button class="retry">retry</button>' : "";
  return `<div class="error">${escapeHtml(message)}${retry}</div>`;
}

export function renderHistory(entries: readonly HistoryEntry[]): string {
  if (entries.length === 0) {
    return '<p class="empty">No queries yet.</p>';
  }
  const items = entries
    .map(
      (entry) => `
  <li>
    <button class="restore" data-entry="${entry.id}">restore</button>
    <span class="history-topic">${escapeHtml(entry.form.topicSentence)}</span>
    <span class="history-meta">k=${entry.form.k}, ${entry.response.results.length} results</span>
  </li>`,
    )
    .join("");
  return `<ol class="history">${items}</ol>`;
}

export function renderHealth(modelVersion: string, poolSize: number): string {
  return `model <code>${escapeHtml(modelVersion.slice(0, 12))}</code> &middot; pool ${poolSize} articles`;
}
