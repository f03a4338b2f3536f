import { describe, expect, it } from "vitest";

import { ApiError, createApi } from "../src/api.js";

type Call = { input: string; init?: RequestInit };

function fetchStub(status: number, body: unknown) {
  const calls: Call[] = [];
  const impl = async (input: string, init?: RequestInit): Promise<Response> => {
    calls.push({ input, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
  return { calls, impl };
}

describe("ask", () => {
  it("posts the question as JSON to /ask", async () => {
    const { calls, impl } = fetchStub(200, { answer: "count=3", sources: [], trace: [] });
    const api = createApi("http://backend", impl);
    const response = await api.ask("How many images are there in memory?");
    expect(response.answer).toBe("count=3");
    expect(calls).toHaveLength(1);
    expect(calls[0].input).toBe("http://backend/ask");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      question: "How many images are there in memory?",
    });
  });

  it("surfaces the service's detail message on 4xx", async () => {
    const { impl } = fetchStub(400, { detail: "'question' must be a non-empty string" });
    const api = createApi("", impl);
    await expect(api.ask("")).rejects.toThrowError(ApiError);
    await expect(api.ask("")).rejects.toThrowError("'question' must be a non-empty string");
  });

  it("lets network failures through untyped for the retry path", async () => {
    const api = createApi("", async () => {
      throw new TypeError("fetch failed");
    });
    await expect(api.ask("hi")).rejects.toThrowError(TypeError);
    await expect(api.ask("hi")).rejects.not.toThrowError(ApiError);
  });
});

describe("notes and files", () => {
  it("URL-encodes the note id", async () => {
    const { calls, impl } = fetchStub(200, {});
    await createApi("", impl).getNote("img 0001/x");
    expect(calls[0].input).toBe("/notes/img%200001%2Fx");
  });

  it("maps 404 to an ApiError carrying the status", async () => {
    const { impl } = fetchStub(404, { detail: "no note 'img_9999'" });
    const error = await createApi("", impl)
      .getNote("img_9999")
      .catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(404);
  });

  it("encodes file path segments but keeps directory slashes", () => {
    const api = createApi("http://backend/");
    expect(api.fileUrl("frames/frame 1.jpg")).toBe(
      "http://backend/files/frames/frame%201.jpg",
    );
  });
});

describe("stats", () => {
  it("reads /graph/stats", async () => {
    const { calls, impl } = fetchStub(200, {
      image_count: 3,
      entity_counts_by_type: { Agent: 1, Object: 0, Action: 0 },
      edge_counts_by_kind: { HAS_PREVIOUS: 2, HAS_ELEMENT: 2 },
      chain_count: 1,
    });
    const stats = await createApi("", impl).getStats();
    expect(calls[0].input).toBe("/graph/stats");
    expect(stats.image_count).toBe(3);
  });
});
