/** Application state and its transitions, kept pure so every rule the UI
 * promises — one question in flight, draft preserved on failure, message
 * history untouched by panel navigation — is a unit-testable function.
 */

import type {
  AskResponse,
  ChatMessage,
  GraphStats,
  NoteView,
  PanelState,
} from "./types.js";

export interface AppState {
  messages: ChatMessage[];
  draft: string;
  pending: boolean;
  panel: PanelState;
  stats: GraphStats | null;
}

export function initialState(): AppState {
  return {
    messages: [],
    draft: "",
    pending: false,
    panel: { kind: "closed" },
    stats: null,
  };
}

/** Send is available only for a non-blank draft with nothing in flight. */
export function canSend(state: AppState): boolean {
  return !state.pending && state.draft.trim().length > 0;
}

export function setDraft(state: AppState, draft: string): AppState {
  return { ...state, draft };
}

/** The user message appears immediately; the draft survives until the
 * answer arrives so a failure never loses typed text. */
export function beginAsk(state: AppState): AppState {
  const question = state.draft.trim();
  return {
    ...state,
    pending: true,
    messages: [...state.messages, { role: "user", text: question }],
  };
}

export function resolveAsk(state: AppState, response: AskResponse): AppState {
  return {
    ...state,
    pending: false,
    draft: "",
    messages: [
      ...state.messages,
      {
        role: "assistant",
        text: response.answer,
        sources: response.sources,
        trace: response.trace,
      },
    ],
  };
}

export function failAsk(state: AppState, text: string, question: string): AppState {
  return {
    ...state,
    pending: false,
    messages: [...state.messages, { role: "error", text, question }],
  };
}

export function openSourceLoading(state: AppState, noteId: string): AppState {
  return { ...state, panel: { kind: "loading", noteId } };
}

export function openSourceLoaded(state: AppState, note: NoteView): AppState {
  return { ...state, panel: { kind: "note", note } };
}

export function openSourceMissing(state: AppState, noteId: string): AppState {
  return { ...state, panel: { kind: "missing", noteId } };
}

export function closePanel(state: AppState): AppState {
  return { ...state, panel: { kind: "closed" } };
}

export function setStats(state: AppState, stats: GraphStats): AppState {
  return { ...state, stats };
}
