// Client-side document state. Mutations apply optimistically, run one at a
// time, and reconcile against the server response; a revision conflict rolls
// the optimistic patch back and refetches the whole document, because the
// server is the source of truth.

import { ApiError, isConflict, RamblekitClient } from "./api.js";
import type { DocumentView, RambleView, SummaryLevel, ZoomStop } from "./types.js";

export interface Toast {
  kind: "conflict" | "error";
  message: string;
}

type Listener = () => void;

export interface StreamingSummary {
  text: string;
  done: boolean;
  failed: boolean;
}

export class DocStore {
  doc: DocumentView | null = null;
  zoom: ZoomStop = "full";
  /** ramble_id -> level -> live stream state, layered over doc summaries */
  streams = new Map<string, Map<SummaryLevel, StreamingSummary>>();
  selection = new Set<string>();
  toast: Toast | null = null;
  /** live dictation buffer for a card (new ramble or respeak) */
  capture: { rambleId: string; text: string } | null = null;
  /** respeak session mirror: original shown grey, buffer below */
  respeak: { rambleId: string; original: string; buffer: string } | null = null;
  editing: string | null = null;

  private listeners = new Set<Listener>();
  private queue: Promise<unknown> = Promise.resolve();

  constructor(readonly client: RamblekitClient) {}

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  get revision(): number {
    return this.doc?.revision ?? 0;
  }

  ramble(id: string): RambleView | undefined {
    return this.doc?.rambles.find((r) => r.ramble_id === id);
  }

  async load(docId: string): Promise<void> {
    this.doc = await this.client.getDocument(docId);
    this.streams.clear();
    this.selection.clear();
    this.emit();
  }

  setCapture(rambleId: string, text: string): void {
    this.capture = { rambleId, text };
    if (this.respeak?.rambleId === rambleId) this.respeak.buffer = text;
    this.emit();
  }

  setRespeak(state: { rambleId: string; original: string; buffer: string } | null): void {
    this.respeak = state;
    this.emit();
  }

  clearCapture(): void {
    this.capture = null;
    this.emit();
  }

  async refetch(): Promise<void> {
    if (this.doc) await this.load(this.doc.doc_id);
  }

  setZoom(stop: ZoomStop): void {
    if (this.zoom === stop) return;
    this.zoom = stop;
    this.emit();
    if (stop !== "full") void this.ensureSummaries(stop);
  }

  /** Text to show for a ramble at the current zoom. Full never looks past
   * the committed text; other stops prefer the live stream buffer, then the
   * server-provided cached summary. */
  displayText(ramble: RambleView): { text: string; pending: boolean } {
    if (this.zoom === "full") return { text: ramble.text, pending: false };
    const level = this.zoom as SummaryLevel;
    const live = this.streams.get(ramble.ramble_id)?.get(level);
    if (live) return { text: live.text, pending: !live.done && !live.failed };
    const cached = ramble.summaries[level];
    if (cached) return { text: cached.text, pending: false };
    return { text: "", pending: true };
  }

  /** Subscribe any ramble without a fresh summary at this level. */
  async ensureSummaries(level: SummaryLevel): Promise<void> {
    if (!this.doc) return;
    const jobs: Promise<void>[] = [];
    for (const ramble of this.doc.rambles) {
      if (ramble.summaries[level] || !ramble.text.trim()) continue;
      if (this.streams.get(ramble.ramble_id)?.get(level)) continue;
      jobs.push(this.streamOne(ramble.ramble_id, level));
    }
    await Promise.all(jobs);
  }

  private levelState(rambleId: string, level: SummaryLevel): StreamingSummary {
    let perRamble = this.streams.get(rambleId);
    if (!perRamble) {
      perRamble = new Map();
      this.streams.set(rambleId, perRamble);
    }
    let state = perRamble.get(level);
    if (!state) {
      state = { text: "", done: false, failed: false };
      perRamble.set(level, state);
    }
    return state;
  }

  async streamOne(rambleId: string, level: SummaryLevel): Promise<void> {
    if (!this.doc) return;
    const state = this.levelState(rambleId, level);
    state.text = "";
    state.done = false;
    state.failed = false;
    try {
      await this.client.streamSummary(this.doc.doc_id, rambleId, level, (ev) => {
        if (ev.event === "chunk") {
          state.text += ev.delta;
        } else if (ev.event === "done") {
          state.text = ev.text;
          state.done = true;
          const ramble = this.ramble(rambleId);
          if (ramble) ramble.summaries[level] = { text: ev.text };
        }
        this.emit();
      });
    } catch (err) {
      state.failed = true;
      this.toast = { kind: "error", message: err instanceof Error ? err.message : String(err) };
      this.emit();
    }
  }

  toggleSelected(rambleId: string): void {
    if (this.selection.has(rambleId)) this.selection.delete(rambleId);
    else this.selection.add(rambleId);
    this.emit();
  }

  clearSelection(): void {
    this.selection.clear();
    this.emit();
  }

  setEditing(rambleId: string | null): void {
    this.editing = rambleId;
    if (rambleId) this.setZoom("full");
    this.emit();
  }

  /** Run one mutation at a time against the latest revision. `optimistic`
   * patches local state immediately; on any failure the pre-mutation
   * snapshot is restored, and on a revision conflict the document is
   * refetched as well. */
  mutate<T>(
    action: (client: RamblekitClient, doc: DocumentView) => Promise<T>,
    optimistic?: (doc: DocumentView) => void,
  ): Promise<T> {
    const run = async (): Promise<T> => {
      if (!this.doc) throw new Error("no document loaded");
      const snapshot = structuredClone(this.doc);
      if (optimistic) {
        optimistic(this.doc);
        this.emit();
      }
      try {
        const result = await action(this.client, this.doc);
        if (this.toast) {
          this.toast = null;
          this.emit();
        }
        return result;
      } catch (err) {
        this.doc = snapshot;
        if (isConflict(err)) {
          this.toast = { kind: "conflict", message: "Someone else edited this document; reloaded." };
          this.emit();
          await this.refetch();
        } else {
          this.toast = {
            kind: "error",
            message: err instanceof ApiError ? `${err.code}: ${err.message}` : String(err),
          };
          this.emit();
        }
        throw err;
      }
    };
    const next = this.queue.then(run, run);
    this.queue = next.catch(() => undefined);
    return next;
  }

  /** Reconcile after a mutation response: replace one ramble's view and the
   * revision, dropping any stream state its hashes invalidated. */
  applyRamble(updated: RambleView, revision: number): void {
    if (!this.doc) return;
    const index = this.doc.rambles.findIndex((r) => r.ramble_id === updated.ramble_id);
    if (index >= 0) this.doc.rambles[index] = updated;
    this.doc.revision = revision;
    this.streams.delete(updated.ramble_id);
    this.emit();
  }
}
