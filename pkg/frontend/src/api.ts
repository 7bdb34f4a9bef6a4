// Typed client over the drafting service. Every write carries the revision
// the caller last saw; the server answers 409 when that is stale and the
// store layer turns that into rollback + refetch.

import type {
  DocumentView,
  ErrorEnvelope,
  LevelResults,
  RambleView,
  SummaryEvent,
  SummaryLevel,
  TransformProposal,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly details: Record<string, unknown>;

  constructor(status: number, envelope: ErrorEnvelope) {
    super(envelope.message);
    this.name = "ApiError";
    this.status = status;
    this.code = envelope.code;
    this.details = envelope.details ?? {};
  }
}

export const isConflict = (err: unknown): err is ApiError =>
  err instanceof ApiError && err.code === "Conflict";

async function toApiError(res: Response): Promise<ApiError> {
  let envelope: ErrorEnvelope;
  try {
    envelope = (await res.json()) as ErrorEnvelope;
  } catch {
    envelope = { code: "BackendFailure", message: res.statusText, details: {} };
  }
  return new ApiError(res.status, envelope);
}

/** Parse "event:/data:" frames from an SSE body, incrementally if the
 * transport exposes a stream, otherwise from the buffered text. */
export async function readSseFrames(
  res: Response,
  onFrame: (event: string, data: string) => void,
): Promise<void> {
  const feed = (() => {
    let buffer = "";
    return (piece: string, flush = false) => {
      buffer += piece;
      for (;;) {
        const cut = buffer.indexOf("\n\n");
        if (cut < 0) break;
        const frame = buffer.slice(0, cut);
        buffer = buffer.slice(cut + 2);
        let event = "message";
        const data: string[] = [];
        for (const line of frame.split("\n")) {
          if (line.startsWith("event: ")) event = line.slice(7);
          else if (line.startsWith("data: ")) data.push(line.slice(6));
        }
        if (data.length) onFrame(event, data.join("\n"));
      }
      if (flush) buffer = "";
    };
  })();

  const body = res.body;
  if (body && typeof body.getReader === "function") {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      feed(decoder.decode(value, { stream: true }));
    }
    feed(decoder.decode(), true);
  } else {
    feed(await res.text(), true);
  }
}

export class RamblekitClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    opts: { revision?: number; body?: unknown } = {},
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (opts.revision !== undefined) headers["X-Doc-Revision"] = String(opts.revision);
    if (opts.body !== undefined) headers["Content-Type"] = "application/json";
    const res = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: opts.body !== undefined ? JSON.stringify(opts.body) : undefined,
    });
    if (!res.ok) throw await toApiError(res);
    return (await res.json()) as T;
  }

  createDocument(title: string): Promise<{ doc_id: string; revision: number }> {
    return this.request("POST", "/documents", { body: { title } });
  }

  getDocument(docId: string): Promise<DocumentView> {
    return this.request("GET", `/documents/${docId}`);
  }

  createRamble(
    docId: string,
    revision: number,
    insertIndex?: number,
  ): Promise<{ ramble: RambleView; revision: number }> {
    const body = insertIndex === undefined ? {} : { insert_index: insertIndex };
    return this.request("POST", `/documents/${docId}/rambles`, { revision, body });
  }

  deleteRamble(docId: string, rambleId: string, revision: number): Promise<{ revision: number }> {
    return this.request("DELETE", `/documents/${docId}/rambles/${rambleId}`, { revision });
  }

  finalize(
    docId: string,
    rambleId: string,
    revision: number,
    rawText: string,
    wait = false,
  ): Promise<{ ramble: RambleView; revision: number }> {
    const suffix = wait ? "?wait=true" : "";
    return this.request("POST", `/documents/${docId}/rambles/${rambleId}/finalize${suffix}`, {
      revision,
      body: { raw_text: rawText },
    });
  }

  replaceText(
    docId: string,
    rambleId: string,
    revision: number,
    text: string,
  ): Promise<{ ramble: RambleView; revision: number }> {
    return this.request("POST", `/documents/${docId}/rambles/${rambleId}/text`, {
      revision,
      body: { text },
    });
  }

  respeakBegin(
    docId: string,
    rambleId: string,
    revision: number,
  ): Promise<{ original_text: string; revision: number }> {
    return this.request("POST", `/documents/${docId}/rambles/${rambleId}/respeak`, {
      revision,
      body: { action: "begin" },
    });
  }

  respeakCommit(
    docId: string,
    rambleId: string,
    revision: number,
    mode: "append" | "replace" | "discard",
    newText: string,
  ): Promise<{ ramble: RambleView; revision: number }> {
    return this.request("POST", `/documents/${docId}/rambles/${rambleId}/respeak`, {
      revision,
      body: { action: "commit", mode, new_text: newText },
    });
  }

  splitManual(
    docId: string,
    rambleId: string,
    revision: number,
    boundary: number,
  ): Promise<{ rambles: RambleView[]; revision: number }> {
    return this.request("POST", `/documents/${docId}/rambles/${rambleId}/split`, {
      revision,
      body: { mode: "manual", boundary },
    });
  }

  splitSemantic(
    docId: string,
    rambleId: string,
    revision: number,
  ): Promise<{ rambles: RambleView[]; revision: number }> {
    return this.request("POST", `/documents/${docId}/rambles/${rambleId}/split`, {
      revision,
      body: { mode: "semantic" },
    });
  }

  merge(
    docId: string,
    revision: number,
    rambleIds: string[],
    mode: "manual" | "semantic",
  ): Promise<{ ramble: RambleView; revision: number }> {
    return this.request("POST", `/documents/${docId}/merge`, {
      revision,
      body: { mode, ramble_ids: rambleIds },
    });
  }

  reorder(
    docId: string,
    revision: number,
    rambleId: string,
    newIndex: number,
  ): Promise<{ revision: number }> {
    return this.request("POST", `/documents/${docId}/reorder`, {
      revision,
      body: { ramble_id: rambleId, new_index: newIndex },
    });
  }

  toggleKeyword(
    docId: string,
    rambleId: string,
    revision: number,
    word: string,
  ): Promise<{ ramble: RambleView; revision: number }> {
    return this.request("POST", `/documents/${docId}/rambles/${rambleId}/keywords`, {
      revision,
      body: { word },
    });
  }

  regenerate(docId: string, rambleId: string, revision: number): Promise<LevelResults> {
    return this.request("POST", `/documents/${docId}/rambles/${rambleId}/regenerate`, {
      revision,
    });
  }

  transform(
    docId: string,
    rambleId: string,
    revision: number,
    prompt: string,
    includeKeywords: boolean,
  ): Promise<TransformProposal> {
    return this.request("POST", `/documents/${docId}/rambles/${rambleId}/transform`, {
      revision,
      body: { prompt, include_keywords: includeKeywords },
    });
  }

  acceptTransform(
    docId: string,
    rambleId: string,
    proposalId: string,
    revision: number,
  ): Promise<{ ramble: RambleView; revision: number }> {
    return this.request(
      "POST",
      `/documents/${docId}/rambles/${rambleId}/transform/${proposalId}/accept`,
      { revision },
    );
  }

  async exportText(docId: string, level: string): Promise<string> {
    const res = await this.fetchFn(
      `${this.baseUrl}/documents/${docId}/export?level=${encodeURIComponent(level)}`,
    );
    if (!res.ok) throw await toApiError(res);
    return res.text();
  }

  /** Subscribe to one ramble's summary stream at a level. Resolves with the
   * done text after the stream closes; chunk deltas arrive via onEvent. */
  async streamSummary(
    docId: string,
    rambleId: string,
    level: SummaryLevel,
    onEvent: (ev: SummaryEvent) => void,
  ): Promise<string> {
    const res = await this.fetchFn(
      `${this.baseUrl}/documents/${docId}/rambles/${rambleId}/summary?level=${level}`,
    );
    if (!res.ok) throw await toApiError(res);
    let doneText: string | null = null;
    let errorCode: string | null = null;
    await readSseFrames(res, (event, data) => {
      const payload = JSON.parse(data) as Record<string, unknown>;
      if (event === "chunk") {
        onEvent({ event: "chunk", level, delta: String(payload.delta ?? "") });
      } else if (event === "done") {
        doneText = String(payload.text ?? "");
        onEvent({ event: "done", level, text: doneText });
      } else if (event === "error") {
        errorCode = String(payload.code ?? "BackendFailure");
        onEvent({ event: "error", code: errorCode });
      }
    });
    if (errorCode) throw new ApiError(502, { code: errorCode, message: "stream failed", details: {} });
    if (doneText === null) throw new ApiError(502, { code: "BackendFailure", message: "stream ended without done", details: {} });
    return doneText;
  }
}
