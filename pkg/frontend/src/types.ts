/** JSON shapes published by the memory service, kept verbatim. */

export interface SourceChip {
  note_id: string;
  snippet: string;
  data_files: string[];
}

export interface TraceEntry {
  tool: string;
  detail: Record<string, unknown>;
}

export interface AskResponse {
  answer: string;
  sources: SourceChip[];
  trace: TraceEntry[];
}

export interface NoteEntity {
  label: string;
  type: string;
}

export interface NoteView {
  id: string;
  plain_caption: string;
  raw_caption: string;
  created_at: string;
  sequence_index: number;
  data_files: string[];
  entities: NoteEntity[];
  neighbors: { previous: string | null; next: string | null };
}

export interface GraphStats {
  image_count: number;
  entity_counts_by_type: Record<string, number>;
  edge_counts_by_kind: Record<string, number>;
  chain_count: number;
}

/** One bubble in the conversation. Assistant messages carry the ask
 * response's sources and trace untouched. */
export type ChatMessage =
  | { role: "user"; text: string }
  | { role: "assistant"; text: string; sources: SourceChip[]; trace: TraceEntry[] }
  | { role: "error"; text: string; question: string };

/** The source panel is pure view state; opening or closing it never
 * touches the message history. */
export type PanelState =
  | { kind: "closed" }
  | { kind: "loading"; noteId: string }
  | { kind: "note"; note: NoteView }
  | { kind: "missing"; noteId: string };
