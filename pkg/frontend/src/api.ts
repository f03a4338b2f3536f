/** Thin typed client over the service's JSON endpoints.
 *
 * The UI reads memory and asks questions; it never ingests. Errors split
 * into ApiError (the service answered with a 4xx/5xx, message taken from
 * the response) and plain network failures (fetch rejected), which the
 * caller renders with a retry affordance.
 */

import type { AskResponse, GraphStats, NoteView } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface MemoryApi {
  ask(question: string): Promise<AskResponse>;
  getNote(noteId: string): Promise<NoteView>;
  getStats(): Promise<GraphStats>;
  fileUrl(path: string): string;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorMessage(response: Response): Promise<string> {
  try {
    const body: unknown = await response.json();
    if (body && typeof body === "object" && "detail" in body) {
      const detail = (body as { detail: unknown }).detail;
      if (typeof detail === "string") return detail;
      return JSON.stringify(detail);
    }
    return JSON.stringify(body);
  } catch {
    return `${response.status} ${response.statusText}`;
  }
}

export function createApi(baseUrl = "", fetchImpl?: FetchLike): MemoryApi {
  const doFetch: FetchLike = fetchImpl ?? ((input, init) => fetch(input, init));
  const base = baseUrl.replace(/\/+$/, "");

  async function request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await doFetch(`${base}${path}`, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorMessage(response));
    }
    return (await response.json()) as T;
  }

  return {
    ask(question: string): Promise<AskResponse> {
      return request<AskResponse>("/ask", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ question }),
      });
    },
    getNote(noteId: string): Promise<NoteView> {
      return request<NoteView>(`/notes/${encodeURIComponent(noteId)}`);
    },
    getStats(): Promise<GraphStats> {
      return request<GraphStats>("/graph/stats");
    },
    fileUrl(path: string): string {
      const encoded = path.split("/").map(encodeURIComponent).join("/");
      return `${base}/files/${encoded}`;
    },
  };
}
