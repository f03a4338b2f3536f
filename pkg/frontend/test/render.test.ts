import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  renderApp,
  renderMessage,
  renderMessages,
  renderPanel,
  renderStats,
  renderTrace,
} from "../src/render.js";
import { initialState, setDraft } from "../src/state.js";
import type { ChatMessage, NoteView, PanelState } from "../src/types.js";

const fileUrl = (path: string) => `/files/${path}`;

const NOTE: NoteView = {
  id: "img_0001",
  plain_caption: "person_1 reads by the window",
  raw_caption: "[person_1:Agent] reads by the window",
  created_at: "2024-03-01T12:00:01Z",
  sequence_index: 1,
  data_files: ["frames/frame_000005.jpg"],
  entities: [
    { label: "person_1", type: "Agent" },
    { label: "window_1", type: "Object" },
  ],
  neighbors: { previous: "img_0000", next: null },
};

describe("escaping", () => {
  it("neutralizes markup in model output", () => {
    expect(escapeHtml(`<img src=x onerror="x">&'`)).toBe(
      "&lt;img src=x onerror=&quot;x&quot;&gt;&amp;&#39;",
    );
  });

  it("keeps script injected via captions inert", () => {
    const html = renderMessage({ role: "user", text: "<script>alert(1)</script>" });
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("message bubbles", () => {
  it("renders an assistant answer with one chip per source", () => {
    const message: ChatMessage = {
      role: "assistant",
      text: "count=329",
      sources: [
        { note_id: "img_0000", snippet: "person_1 is reading", data_files: [] },
        { note_id: "img_0005", snippet: "person_1 is cooking", data_files: [] },
      ],
      trace: [],
    };
    const html = renderMessage(message);
    expect(html).toContain("count=329");
    expect(html.match(/class="gm-chip"/g)).toHaveLength(2);
    expect(html).toContain('data-note-id="img_0000"');
    expect(html).toContain('data-note-id="img_0005"');
  });

  it("omits the source row when there are no sources", () => {
    const html = renderMessage({ role: "assistant", text: "nothing", sources: [], trace: [] });
    expect(html).not.toContain("gm-sources");
  });

  it("renders errors with a retry control holding the question", () => {
    const html = renderMessage({ role: "error", text: "boom", question: "how many?" });
    expect(html).toContain("gm-error");
    expect(html).toContain('data-retry="how many?"');
  });

  it("concatenates the conversation in order", () => {
    const html = renderMessages([
      { role: "user", text: "first" },
      { role: "assistant", text: "second", sources: [], trace: [] },
    ]);
    expect(html.indexOf("first")).toBeLessThan(html.indexOf("second"));
  });
});

describe("tool trace", () => {
  it("is collapsed by default and names every tool", () => {
    const html = renderTrace([
      { tool: "StructuredQuery", detail: { generated_query: "MATCH (n:Image) RETURN count(n)" } },
      { tool: "SemanticSearch", detail: { context_notes: [{ note_id: "img_0000" }] } },
    ]);
    expect(html).toContain("<details");
    expect(html).not.toContain("<details open");
    expect(html).toContain("StructuredQuery");
    expect(html).toContain("SemanticSearch");
    expect(html).toContain("MATCH (n:Image) RETURN count(n)");
    expect(html).toContain("1 context note");
  });

  it("renders nothing for an empty trace", () => {
    expect(renderTrace([])).toBe("");
  });
});

describe("source panel", () => {
  it("is empty while closed", () => {
    expect(renderPanel({ kind: "closed" }, fileUrl)).toBe("");
  });

  it("shows caption, entity chips, image, and neighbor navigation", () => {
    const html = renderPanel({ kind: "note", note: NOTE }, fileUrl);
    expect(html).toContain("person_1 reads by the window");
    expect(html).toContain('src="/files/frames/frame_000005.jpg"');
    expect(html).toContain("gm-entity-agent");
    expect(html).toContain("gm-entity-object");
    expect(html).toContain('data-note-id="img_0000"');
    // no next neighbor: the control is present but inert
    expect(html).toContain("disabled>next");
  });

  it("skips the image for notes without data files", () => {
    const bare = { ...NOTE, data_files: [] };
    expect(renderPanel({ kind: "note", note: bare }, fileUrl)).not.toContain("<img");
  });

  it("renders the missing-note notice on 404", () => {
    const panel: PanelState = { kind: "missing", noteId: "img_9999" };
    expect(renderPanel(panel, fileUrl)).toContain("note no longer available");
  });
});

describe("stats panel", () => {
  it("handles the empty store", () => {
    expect(renderStats(null)).toContain("memory empty");
  });

  it("lists image, entity, and chain counts", () => {
    const html = renderStats({
      image_count: 329,
      entity_counts_by_type: { Agent: 1, Object: 12, Action: 9 },
      edge_counts_by_kind: { HAS_PREVIOUS: 328, HAS_ELEMENT: 900 },
      chain_count: 1,
    });
    expect(html).toContain("images: 329");
    expect(html).toContain("Agent: 1");
    expect(html).toContain("chains: 1");
  });
});

describe("whole-app view", () => {
  it("disables send for blank drafts and while pending", () => {
    expect(renderApp(initialState(), fileUrl).sendDisabled).toBe(true);
    expect(renderApp(setDraft(initialState(), "hi"), fileUrl).sendDisabled).toBe(false);
    expect(
      renderApp({ ...setDraft(initialState(), "hi"), pending: true }, fileUrl).sendDisabled,
    ).toBe(true);
  });
});
