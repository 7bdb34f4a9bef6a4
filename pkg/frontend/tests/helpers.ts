import { inject } from "vitest";

import { RamblekitClient, type FetchLike } from "../src/api.js";
import { DocStore } from "../src/store.js";
import type { DocumentView } from "../src/types.js";

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
  /** set once the response arrives */
  status?: number;
}

export interface CountingFetch {
  fetchFn: FetchLike;
  calls: RecordedCall[];
  ofPath: (fragment: string) => RecordedCall[];
}

export function baseUrl(): string {
  return inject("baseUrl");
}

/** happy-dom applies the same-origin policy; align the page with the API. */
export function sameOrigin(): void {
  const happy = (globalThis as { happyDOM?: { setURL: (url: string) => void } }).happyDOM;
  happy?.setURL(baseUrl());
}

export function countingFetch(): CountingFetch {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (input, init) => {
    const url = input;
    let body: unknown = null;
    if (typeof init?.body === "string") {
      try {
        body = JSON.parse(init.body);
      } catch {
        body = init.body;
      }
    }
    const call: RecordedCall = {
      method: init?.method ?? "GET",
      path: new URL(url).pathname + new URL(url).search,
      body,
    };
    calls.push(call);
    const res = await fetch(input, init);
    call.status = res.status;
    return res;
  };
  return {
    fetchFn,
    calls,
    ofPath: (fragment) => calls.filter((c) => c.path.includes(fragment)),
  };
}

export function client(fetchFn?: FetchLike): RamblekitClient {
  return new RamblekitClient(baseUrl(), fetchFn ?? ((input, init) => fetch(input, init)));
}

export interface Session {
  store: DocStore;
  api: RamblekitClient;
  net: CountingFetch;
}

/** Fresh store wired to a counting fetch so tests can assert traffic. */
export function session(): Session {
  const net = countingFetch();
  const api = client(net.fetchFn);
  return { store: new DocStore(api), api, net };
}

/** New document with one finalized ramble per text; summaries are fresh. */
export async function seedDocument(
  api: RamblekitClient,
  title: string,
  texts: string[],
): Promise<DocumentView> {
  const created = await api.createDocument(title);
  let revision = created.revision;
  let docId = created.doc_id;
  for (const text of texts) {
    const added = await api.createRamble(docId, revision);
    revision = added.revision;
    const done = await api.finalize(docId, added.ramble.ramble_id, revision, text, true);
    revision = done.revision;
  }
  return api.getDocument(docId);
}

export async function until(check: () => boolean, timeoutMs = 10_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!check()) {
    if (Date.now() > deadline) throw new Error("condition never held");
    await new Promise((r) => setTimeout(r, 10));
  }
}

export function $(root: ParentNode, selector: string): HTMLElement {
  const el = root.querySelector(selector);
  if (!el) throw new Error(`missing element: ${selector}`);
  return el as HTMLElement;
}

export function $$(root: ParentNode, selector: string): HTMLElement[] {
  return Array.from(root.querySelectorAll(selector)) as HTMLElement[];
}

export function mountPoint(): HTMLElement {
  document.body.textContent = "";
  const root = document.createElement("div");
  document.body.appendChild(root);
  return root;
}
