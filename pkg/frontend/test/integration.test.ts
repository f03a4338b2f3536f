/**
 * End-to-end chat loop against the real memory service: ingest the bundled
 * 329-caption fixture, serve it, and drive the actual DOM through boot().
 * Covers the release criterion for the UI — the counting question renders
 * a bubble containing "329" with source chips, and clicking a chip opens a
 * note view whose caption matches GET /notes/{id}.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, beforeEach, describe, expect, it } from "vitest";

import { createApi } from "../src/api.js";
import { boot, type App } from "../src/main.js";

const FRONTEND_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..");
const PORT = 8400 + (process.pid % 1000);
const BASE = `http://127.0.0.1:${PORT}`;
const ENV = { ...process.env, MEM_PROVIDER_MODE: "stub" };

let server: ChildProcess | undefined;
let dataDir: string;

async function waitFor(condition: () => boolean, what: string, timeoutMs = 30_000) {
  const start = Date.now();
  while (!condition()) {
    if (Date.now() - start > timeoutMs) throw new Error(`timed out waiting for ${what}`);
    await new Promise((resolve) => setTimeout(resolve, 50));
  }
}

async function serverUp(): Promise<boolean> {
  try {
    const response = await fetch(`${BASE}/health`);
    return response.ok;
  } catch {
    return false;
  }
}

beforeAll(async () => {
  // In production the page is served by the service itself, so requests
  // are same-origin; give the test window the service's origin too.
  const happyDOM = (globalThis as unknown as { happyDOM?: { setURL?: (u: string) => void } })
    .happyDOM;
  if (!happyDOM?.setURL) throw new Error("happy-dom window API unavailable");
  happyDOM.setURL(`${BASE}/`);

  dataDir = mkdtempSync(join(tmpdir(), "gmweb-"));
  const fixture = execFileSync(
    "python3",
    ["-c", "import groundmem.fixtures as f; print(f.home_scene_path())"],
    { env: ENV, encoding: "utf-8" },
  ).trim();
  execFileSync(
    "python3",
    ["-m", "groundmem.cli", "--data-dir", dataDir, "ingest", fixture],
    { env: ENV, encoding: "utf-8" },
  );
  server = spawn(
    "python3",
    [
      "-m", "groundmem.cli",
      "--data-dir", dataDir,
      "serve", "--host", "127.0.0.1", "--port", String(PORT),
    ],
    { env: ENV, stdio: "ignore" },
  );
  const start = Date.now();
  while (!(await serverUp())) {
    if (Date.now() - start > 60_000) throw new Error("service did not come up");
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
});

afterAll(() => {
  server?.kill();
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

/** Mount the real page markup and boot the app against the live service. */
function mount(base = BASE): App {
  const page = readFileSync(join(FRONTEND_ROOT, "index.html"), "utf-8");
  const body = page.slice(page.indexOf("<body>") + "<body>".length, page.indexOf("</body>"));
  document.body.innerHTML = body;
  return boot(document, createApi(base));
}

function input(): HTMLTextAreaElement {
  return document.getElementById("gm-input") as HTMLTextAreaElement;
}

function send(): HTMLButtonElement {
  return document.getElementById("gm-send") as HTMLButtonElement;
}

function type(text: string): void {
  const box = input();
  box.value = text;
  box.dispatchEvent(new Event("input", { bubbles: true }));
}

describe("chat loop against the fixture service", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("answers the counting question with a 329 bubble and a source chip that opens the matching note", async () => {
    mount();
    expect(send().disabled).toBe(true);

    type("How many images are there in memory?");
    expect(send().disabled).toBe(false);
    send().click();
    expect(send().disabled).toBe(true); // one in-flight question at a time

    await waitFor(
      () => document.querySelectorAll(".gm-assistant").length === 1,
      "the answer bubble",
    );
    const bubble = document.querySelector(".gm-assistant")!;
    expect(bubble.textContent).toContain("329");

    const chips = document.querySelectorAll<HTMLButtonElement>(".gm-chip");
    expect(chips.length).toBeGreaterThanOrEqual(1);

    const chip = chips[0];
    const noteId = chip.getAttribute("data-note-id")!;
    chip.click();
    await waitFor(
      () => document.querySelector("[data-panel-note]") !== null,
      "the source panel",
    );

    const reference = await (await fetch(`${BASE}/notes/${noteId}`)).json();
    const panel = document.querySelector("[data-panel-note]")!;
    expect(panel.getAttribute("data-panel-note")).toBe(noteId);
    expect(panel.querySelector(".gm-caption")!.textContent).toBe(reference.plain_caption);
    // the chip's snippet is a prefix of the note's caption
    const snippet = chip.getAttribute("title")!;
    expect(reference.plain_caption.startsWith(snippet)).toBe(true);
  });

  it("keeps the message history intact across a panel open/close cycle", async () => {
    const app = mount();
    // An entity-count answer ("How many people") cites no image notes and
    // so carries no chips; use a note-backed question for the cycle.
    type("How many images are there in memory?");
    send().click();
    await waitFor(() => document.querySelectorAll(".gm-assistant").length === 1, "answer");
    expect(document.querySelector(".gm-assistant")!.textContent).toContain("329");

    const before = document.getElementById("gm-messages")!.innerHTML;
    const chip = document.querySelector<HTMLButtonElement>(".gm-chip")!;
    chip.click();
    await waitFor(() => document.querySelector("[data-panel-note]") !== null, "panel");

    (document.querySelector("[data-close-panel]") as HTMLButtonElement).click();
    expect(document.getElementById("gm-panel")!.innerHTML).toBe("");
    expect(document.getElementById("gm-messages")!.innerHTML).toBe(before);
    expect(app.state().messages).toHaveLength(2);
  });

  it("navigates to previous and next neighbors from a mid-chain note", async () => {
    const app = mount();
    await app.openSource("img_0001");
    await waitFor(() => document.querySelector("[data-panel-note]") !== null, "panel");

    const next = Array.from(
      document.querySelectorAll<HTMLButtonElement>(".gm-nav"),
    ).find((el) => el.textContent!.includes("next"))!;
    expect(next.getAttribute("data-note-id")).toBe("img_0002");
    next.click();
    await waitFor(
      () => document.querySelector("[data-panel-note]")?.getAttribute("data-panel-note") === "img_0002",
      "next note",
    );

    const previous = Array.from(
      document.querySelectorAll<HTMLButtonElement>(".gm-nav"),
    ).find((el) => el.textContent!.includes("previous"))!;
    expect(previous.getAttribute("data-note-id")).toBe("img_0001");
    previous.click();
    await waitFor(
      () => document.querySelector("[data-panel-note]")?.getAttribute("data-panel-note") === "img_0001",
      "previous note",
    );
  });

  it("renders a 404 source as no longer available", async () => {
    const app = mount();
    await app.openSource("img_9999");
    expect(document.getElementById("gm-panel")!.textContent).toContain(
      "note no longer available",
    );
  });

  it("shows the memory stats panel for the fixture", async () => {
    mount();
    await waitFor(
      () => document.getElementById("gm-stats")!.textContent!.includes("images: 329"),
      "stats",
    );
  });

  it("renders an inline error and preserves the input when the backend is down", async () => {
    mount("http://127.0.0.1:9"); // nothing listens there
    type("is anyone home?");
    send().click();
    await waitFor(() => document.querySelector(".gm-error") !== null, "error bubble");
    expect(input().value).toBe("is anyone home?");
    const retry = document.querySelector(".gm-retry")!;
    expect(retry.getAttribute("data-retry")).toBe("is anyone home?");
  });
});
