/** Pure renderers: state in, HTML string out. All interactive elements
 * carry data- attributes; the wiring layer dispatches on those, so these
 * functions stay free of listeners and globals.
 */

import type {
  ChatMessage,
  GraphStats,
  NoteView,
  PanelState,
  SourceChip,
  TraceEntry,
} from "./types.js";
import type { AppState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function renderChip(chip: SourceChip): string {
  return (
    `<button class="gm-chip" type="button" data-note-id="${escapeHtml(chip.note_id)}" ` +
    `title="${escapeHtml(chip.snippet)}">${escapeHtml(chip.note_id)}</button>`
  );
}

function describeTrace(entry: TraceEntry): string {
  const detail = entry.detail;
  const parts: string[] = [];
  if (typeof detail["generated_query"] === "string") {
    parts.push(`query: ${detail["generated_query"] as string}`);
  }
  const context = detail["context_notes"];
  if (Array.isArray(context) && context.length > 0) {
    parts.push(`${context.length} context note${context.length === 1 ? "" : "s"}`);
  }
  if (typeof detail["error"] === "string") {
    parts.push(`error: ${detail["error"] as string}`);
  }
  return parts.join(" · ");
}

/** Collapsed by default; the conversation stays in front. */
export function renderTrace(trace: TraceEntry[]): string {
  if (trace.length === 0) return "";
  const tools = trace.map((t) => escapeHtml(t.tool)).join(", ");
  const rows = trace
    .map(
      (entry) =>
        `<li><strong>${escapeHtml(entry.tool)}</strong> ` +
        `<span>${escapeHtml(describeTrace(entry))}</span></li>`,
    )
    .join("");
  return (
    `<details class="gm-trace"><summary>tools: ${tools}</summary>` +
    `<ul>${rows}</ul></details>`
  );
}

export function renderMessage(message: ChatMessage): string {
  if (message.role === "user") {
    return `<div class="gm-msg gm-user"><p>${escapeHtml(message.text)}</p></div>`;
  }
  if (message.role === "error") {
    return (
      `<div class="gm-msg gm-error"><p>${escapeHtml(message.text)}</p>` +
      `<button class="gm-retry" type="button" data-retry="${escapeHtml(message.question)}">` +
      `Retry</button></div>`
    );
  }
  const chips =
    message.sources.length > 0
      ? `<div class="gm-sources">${message.sources.map(renderChip).join("")}</div>`
      : "";
  return (
    `<div class="gm-msg gm-assistant"><p>${escapeHtml(message.text)}</p>` +
    chips +
    renderTrace(message.trace) +
    `</div>`
  );
}

export function renderMessages(messages: ChatMessage[]): string {
  return messages.map(renderMessage).join("");
}

function renderNeighbor(label: string, noteId: string | null): string {
  if (noteId === null) {
    return `<button class="gm-nav" type="button" disabled>${label}</button>`;
  }
  return (
    `<button class="gm-nav" type="button" data-note-id="${escapeHtml(noteId)}">` +
    `${label}</button>`
  );
}

export function renderPanel(panel: PanelState, fileUrl: (path: string) => string): string {
  if (panel.kind === "closed") return "";
  if (panel.kind === "loading") {
    return `<div class="gm-panel"><p>Loading ${escapeHtml(panel.noteId)}…</p></div>`;
  }
  if (panel.kind === "missing") {
    return (
      `<div class="gm-panel"><p class="gm-missing">note no longer available</p>` +
      `<button class="gm-close" type="button" data-close-panel>Close</button></div>`
    );
  }
  const note: NoteView = panel.note;
  const image =
    note.data_files.length > 0
      ? `<img class="gm-frame" src="${escapeHtml(fileUrl(note.data_files[0]))}" ` +
        `alt="frame for ${escapeHtml(note.id)}">`
      : "";
  const entities = note.entities
    .map(
      (entity) =>
        `<span class="gm-entity gm-entity-${escapeHtml(entity.type.toLowerCase())}">` +
        `${escapeHtml(entity.label)}</span>`,
    )
    .join("");
  return (
    `<div class="gm-panel" data-panel-note="${escapeHtml(note.id)}">` +
    `<header><h2>${escapeHtml(note.id)}</h2>` +
    `<button class="gm-close" type="button" data-close-panel>Close</button></header>` +
    image +
    `<p class="gm-caption">${escapeHtml(note.plain_caption)}</p>` +
    `<p class="gm-when">${escapeHtml(note.created_at)}</p>` +
    (entities ? `<div class="gm-entities">${entities}</div>` : "") +
    `<nav class="gm-neighbors">` +
    renderNeighbor("◀ previous", note.neighbors.previous) +
    renderNeighbor("next ▶", note.neighbors.next) +
    `</nav></div>`
  );
}

export function renderStats(stats: GraphStats | null): string {
  if (stats === null) return "<p>memory empty</p>";
  const entities = Object.entries(stats.entity_counts_by_type)
    .map(([kind, count]) => `<li>${escapeHtml(kind)}: ${count}</li>`)
    .join("");
  return (
    `<ul class="gm-stats">` +
    `<li>images: ${stats.image_count}</li>` +
    entities +
    `<li>chains: ${stats.chain_count}</li>` +
    `</ul>`
  );
}

/** Full-app render applied by the wiring layer after every transition. */
export function renderApp(
  state: AppState,
  fileUrl: (path: string) => string,
): { messages: string; panel: string; stats: string; sendDisabled: boolean } {
  return {
    messages: renderMessages(state.messages),
    panel: renderPanel(state.panel, fileUrl),
    stats: renderStats(state.stats),
    sendDisabled: state.pending || state.draft.trim().length === 0,
  };
}
