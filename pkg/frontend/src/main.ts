/** DOM wiring: owns the single AppState, applies pure renders after every
 * transition, and delegates clicks through data- attributes. Boots itself
 * in the browser; tests import boot() and drive it directly.
 */

import { ApiError, createApi, type MemoryApi } from "./api.js";
import {
  type AppState,
  beginAsk,
  canSend,
  closePanel,
  failAsk,
  initialState,
  openSourceLoaded,
  openSourceLoading,
  openSourceMissing,
  resolveAsk,
  setDraft,
  setStats,
} from "./state.js";
import { renderApp } from "./render.js";

export interface App {
  /** Current state snapshot (read-only; for tests and debugging). */
  state(): AppState;
  /** Submit the current draft; resolves when the answer or error landed. */
  send(): Promise<void>;
  /** Open the source panel for a note id; resolves when rendered. */
  openSource(noteId: string): Promise<void>;
  /** Refresh the stats panel. */
  refreshStats(): Promise<void>;
}

export function boot(doc: Document, api: MemoryApi = createApi("")): App {
  const messagesEl = doc.getElementById("gm-messages");
  const panelEl = doc.getElementById("gm-panel");
  const statsEl = doc.getElementById("gm-stats");
  const inputEl = doc.getElementById("gm-input") as HTMLTextAreaElement | null;
  const sendEl = doc.getElementById("gm-send") as HTMLButtonElement | null;
  if (!messagesEl || !panelEl || !statsEl || !inputEl || !sendEl) {
    throw new Error("chat markup missing; expected #gm-messages/#gm-panel/#gm-stats/#gm-input/#gm-send");
  }

  let state = initialState();

  /** Every transition runs against the state current at apply time, so
   * async completions (answers, notes, stats) can never clobber changes
   * that landed while they were in flight. */
  function apply(transition: (current: AppState) => AppState): void {
    state = transition(state);
    const view = renderApp(state, api.fileUrl);
    messagesEl!.innerHTML = view.messages;
    panelEl!.innerHTML = view.panel;
    statsEl!.innerHTML = view.stats;
    sendEl!.disabled = view.sendDisabled;
    messagesEl!.scrollTop = messagesEl!.scrollHeight;
  }

  async function send(): Promise<void> {
    if (!canSend(state)) return;
    const question = state.draft.trim();
    apply(beginAsk);
    try {
      const response = await api.ask(question);
      apply((current) => resolveAsk(current, response));
      inputEl!.value = "";
      void refreshStats();
    } catch (error) {
      const text =
        error instanceof ApiError
          ? error.message
          : "cannot reach the memory service";
      apply((current) => failAsk(current, text, question));
    }
  }

  async function openSource(noteId: string): Promise<void> {
    apply((current) => openSourceLoading(current, noteId));
    try {
      const note = await api.getNote(noteId);
      apply((current) => openSourceLoaded(current, note));
    } catch {
      // 404 and unreachable-backend alike: the note cannot be shown.
      apply((current) => openSourceMissing(current, noteId));
    }
  }

  async function refreshStats(): Promise<void> {
    try {
      const stats = await api.getStats();
      apply((current) => setStats(current, stats));
    } catch {
      // stats are decorative; a failed refresh never disturbs the chat
    }
  }

  inputEl.addEventListener("input", () => {
    apply((current) => setDraft(current, inputEl.value));
  });
  inputEl.addEventListener("keydown", (event: KeyboardEvent) => {
    if (event.key === "Enter" && !event.shiftKey) {
      event.preventDefault();
      void send();
    }
  });
  sendEl.addEventListener("click", () => void send());

  messagesEl.addEventListener("click", (event: Event) => {
    const target = (event.target as Element | null)?.closest("[data-note-id],[data-retry]");
    if (!target) return;
    const noteId = target.getAttribute("data-note-id");
    if (noteId) {
      void openSource(noteId);
      return;
    }
    const retry = target.getAttribute("data-retry");
    if (retry !== null) {
      inputEl.value = retry;
      apply((current) => setDraft(current, retry));
      void send();
    }
  });

  panelEl.addEventListener("click", (event: Event) => {
    const target = event.target as Element | null;
    if (target?.closest("[data-close-panel]")) {
      apply(closePanel);
      return;
    }
    const nav = target?.closest("[data-note-id]");
    const noteId = nav?.getAttribute("data-note-id");
    if (noteId) void openSource(noteId);
  });

  apply((current) => current);
  void refreshStats();

  return { state: () => state, send, openSource, refreshStats };
}

function autoboot(): void {
  const root = document.getElementById("gm-app");
  if (root && root.getAttribute("data-booted") !== "yes") {
    root.setAttribute("data-booted", "yes");
    boot(document);
  }
}

if (typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", autoboot);
  } else {
    autoboot();
  }
}
