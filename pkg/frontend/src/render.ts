/**
 * HTML renderers. Every function returns a string; the caller owns the DOM.
 * Entry order must follow the API payload exactly, the server already ranks.
 */

import type { ContextEntry, ContextView, FocusKind, SearchResponse, SearchResult, Stats } from "./api.js";
import { formatHash } from "./router.js";

export function escapeHtml(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;")
        .replace(/'/g, "&#39;");
}

export function renderLoading(): string {
    return '<p class="loading">Loading&hellip;</p>';
}

export function renderError(message: string): string {
    return `<div class="error">${escapeHtml(message)}</div>`;
}

export function renderHome(stats: Stats): string {
    return `<div class="home">
        <h1>Snapshot</h1>
        <p class="meta">Search above, or follow any link; every view is the ranked
        neighborhood of one entity.</p>
        ${countsTable("entities", stats.entities)}
        ${countsTable("relations", stats.relations)}
    </div>`;
}

function countsTable(title: string, counts: Record<string, number>): string {
    const rows = Object.keys(counts)
        .sort()
        .map((name) => `<tr><td>${escapeHtml(name)}</td><td>${counts[name]}</td></tr>`)
        .join("");
    return `<h2>${escapeHtml(title)}</h2>
        <table class="counts"><tbody>${rows}</tbody></table>`;
}

export function renderSearchResults(resp: SearchResponse): string {
    const heading = `${resp.results.length} match(es) for "${escapeHtml(resp.query)}"`;
    if (resp.results.length === 0) {
        return `<div class="search"><h1>${heading}</h1></div>`;
    }
    const items = resp.results.map(renderSearchResult).join("");
    return `<div class="search"><h1>${heading}</h1><ol class="results">${items}</ol></div>`;
}

function renderSearchResult(result: SearchResult): string {
    const hash = formatHash({
        name: "context",
        kind: result.kind as FocusKind,
        id: result.id,
        k: 10,
    });
    return `<li class="result">
        <span class="kind kind-${escapeHtml(result.kind)}">${escapeHtml(result.kind)}</span>
        <a class="result-link" href="${escapeHtml(hash)}"
           data-id="${escapeHtml(result.id)}" data-kind="${escapeHtml(result.kind)}"
        >${escapeHtml(result.label)}</a>
    </li>`;
}

const SECTIONS: Array<["developers" | "resources" | "tasks", FocusKind]> = [
    ["developers", "developer"],
    ["resources", "resource"],
    ["tasks", "task"],
];

export function renderContextView(view: ContextView): string {
    const sections = SECTIONS.map(([name, kind]) =>
        renderSection(name, kind, view[name], view.k),
    ).join("");
    return `<div class="context">
        <h1><span class="kind kind-${escapeHtml(view.focus.kind)}">${escapeHtml(view.focus.kind)}</span>${escapeHtml(view.focus.id)}</h1>
        <p class="meta">top ${view.k} per section, computed ${escapeHtml(view.generated_at)}</p>
        ${sections}
    </div>`;
}

function renderSection(name: string, kind: FocusKind, entries: ContextEntry[], k: number): string {
    const body = entries.length
        ? `<ol class="entries">${entries.map((entry) => renderEntry(kind, entry, k)).join("")}</ol>`
        : '<p class="empty">none</p>';
    return `<section class="context-section" data-section="${name}">
        <h2>${name}</h2>${body}
    </section>`;
}

function renderEntry(kind: FocusKind, entry: ContextEntry, k: number): string {
    // Pivot links keep the current k so a deep link reproduces the same view.
    const hash = formatHash({ name: "context", kind, id: entry.id, k });
    const evidence = entry.evidence
        .map((line) => `<li>${escapeHtml(line)}</li>`)
        .join("");
    return `<li class="entry">
        <span class="score">${entry.score.toFixed(1)}</span>
        <a class="entry-link" href="${escapeHtml(hash)}"
           data-id="${escapeHtml(entry.id)}" data-kind="${escapeHtml(kind)}"
        >${escapeHtml(entry.label)}</a>
        <span class="kinds">${entry.kinds.map(escapeHtml).join(", ")}</span>
        <ul class="evidence">${evidence}</ul>
    </li>`;
}
