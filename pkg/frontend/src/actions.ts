// Controller layer: every user gesture lands here as one store mutation.
// Structural operations (split, merge, reorder) refetch the document after
// the server confirms, since their full effect is easiest to read back.

import type { DocStore } from "./store.js";
import type { DictationSource } from "./mic.js";
import type { SummaryLevel } from "./types.js";

export function startNewRamble(store: DocStore, source: DictationSource): Promise<void> {
  return store
    .mutate(async (client, doc) => {
      const created = await client.createRamble(doc.doc_id, doc.revision);
      doc.rambles.push(created.ramble);
      doc.revision = created.revision;
      return created.ramble.ramble_id;
    })
    .then(
      (rambleId) =>
        new Promise<void>((resolve, reject) => {
          source.start({
            onPartial: (text) => store.setCapture(rambleId, text),
            onFinal: (text) => {
              store.setCapture(rambleId, text);
              // nothing said: drop the placeholder instead of finalizing
              const commit = text.trim()
                ? store.mutate(async (client, doc) => {
                    const res = await client.finalize(doc.doc_id, rambleId, doc.revision, text);
                    store.applyRamble(res.ramble, res.revision);
                  })
                : deleteRamble(store, rambleId);
              commit.then(() => resolve(), reject).finally(() => store.clearCapture());
            },
            onError: (message) => {
              store.clearCapture();
              reject(new Error(message));
            },
          });
        }),
    );
}

export async function respeakStart(
  store: DocStore,
  rambleId: string,
  source: DictationSource,
): Promise<void> {
  const original = await store.mutate(async (client, doc) => {
    const res = await client.respeakBegin(doc.doc_id, rambleId, doc.revision);
    doc.revision = res.revision;
    const ramble = doc.rambles.find((r) => r.ramble_id === rambleId);
    if (ramble) ramble.state = "respeaking";
    return res.original_text;
  });
  store.setRespeak({ rambleId, original, buffer: "" });
  source.start({
    onPartial: (text) => store.setCapture(rambleId, text),
    onFinal: (text) => store.setCapture(rambleId, text),
  });
}

export async function respeakChoose(
  store: DocStore,
  rambleId: string,
  mode: "append" | "replace" | "discard",
): Promise<void> {
  const buffer = store.respeak?.rambleId === rambleId ? store.respeak.buffer : "";
  await store.mutate(async (client, doc) => {
    const res = await client.respeakCommit(doc.doc_id, rambleId, doc.revision, mode, buffer);
    store.applyRamble(res.ramble, res.revision);
  });
  store.setRespeak(null);
  store.clearCapture();
}

export async function saveEdit(store: DocStore, rambleId: string, text: string): Promise<void> {
  await store.mutate(async (client, doc) => {
    const res = await client.replaceText(doc.doc_id, rambleId, doc.revision, text);
    store.applyRamble(res.ramble, res.revision);
  });
  store.setEditing(null);
}

/** Return key while editing: manual split at the caret. */
export async function splitAtCaret(
  store: DocStore,
  rambleId: string,
  draft: string,
  caret: number,
): Promise<void> {
  await store.mutate(async (client, doc) => {
    const current = doc.rambles.find((r) => r.ramble_id === rambleId);
    let revision = doc.revision;
    if (current && current.text !== draft) {
      const saved = await client.replaceText(doc.doc_id, rambleId, revision, draft);
      revision = saved.revision;
      doc.revision = revision;
    }
    await client.splitManual(doc.doc_id, rambleId, revision, caret);
  });
  store.setEditing(null);
  await store.refetch();
}

export async function semanticSplit(store: DocStore, rambleId: string): Promise<void> {
  await store.mutate((client, doc) => client.splitSemantic(doc.doc_id, rambleId, doc.revision));
  await store.refetch();
}

/** Drop into the gap before `gapIndex`. Removal-then-insert semantics mean
 * a source above the gap shifts it down by one. */
export async function reorderToGap(
  store: DocStore,
  rambleId: string,
  gapIndex: number,
): Promise<void> {
  await store.mutate(
    async (client, doc) => {
      const from = doc.rambles.findIndex((r) => r.ramble_id === rambleId);
      if (from < 0) return;
      const target = from < gapIndex ? gapIndex - 1 : gapIndex;
      const res = await client.reorder(doc.doc_id, doc.revision, rambleId, target);
      doc.revision = res.revision;
    },
    (doc) => {
      const from = doc.rambles.findIndex((r) => r.ramble_id === rambleId);
      if (from < 0) return;
      const target = from < gapIndex ? gapIndex - 1 : gapIndex;
      const [moved] = doc.rambles.splice(from, 1);
      if (moved) doc.rambles.splice(target, 0, moved);
    },
  );
  await store.refetch();
}

/** Drop one card onto another: the target absorbs the dragged text. */
export async function mergeOnto(
  store: DocStore,
  targetId: string,
  sourceId: string,
): Promise<void> {
  if (targetId === sourceId) return;
  await store.mutate(
    async (client, doc) => {
      const res = await client.merge(doc.doc_id, doc.revision, [targetId, sourceId], "manual");
      doc.revision = res.revision;
    },
    (doc) => {
      const target = doc.rambles.find((r) => r.ramble_id === targetId);
      const source = doc.rambles.find((r) => r.ramble_id === sourceId);
      if (!target || !source) return;
      target.text = `${target.text} ${source.text}`;
      doc.rambles = doc.rambles.filter((r) => r.ramble_id !== sourceId);
    },
  );
  await store.refetch();
}

export async function semanticMergeSelection(store: DocStore): Promise<void> {
  const doc = store.doc;
  if (!doc) return;
  const ids = doc.rambles.map((r) => r.ramble_id).filter((id) => store.selection.has(id));
  if (ids.length < 2) return;
  await store.mutate((client, d) => client.merge(d.doc_id, d.revision, ids, "semantic"));
  store.clearSelection();
  await store.refetch();
}

export async function toggleKeyword(store: DocStore, rambleId: string, word: string): Promise<void> {
  await store.mutate(
    async (client, doc) => {
      const res = await client.toggleKeyword(doc.doc_id, rambleId, doc.revision, word);
      store.applyRamble(res.ramble, res.revision);
    },
    (doc) => {
      const entry = doc.rambles
        .find((r) => r.ramble_id === rambleId)
        ?.keywords.find((k) => k.word === word);
      if (entry) entry.active = !entry.active;
    },
  );
}

export async function regenerate(store: DocStore, rambleId: string): Promise<void> {
  await store.mutate((client, doc) => client.regenerate(doc.doc_id, rambleId, doc.revision));
  await store.refetch();
  if (store.zoom !== "full") await store.ensureSummaries(store.zoom as SummaryLevel);
}

export function magicPropose(
  store: DocStore,
  rambleId: string,
  prompt: string,
  includeKeywords: boolean,
): Promise<{ proposalId: string; candidate: string }> {
  return store.mutate(async (client, doc) => {
    const res = await client.transform(doc.doc_id, rambleId, doc.revision, prompt, includeKeywords);
    return { proposalId: res.proposal_id, candidate: res.candidate_text };
  });
}

export async function magicAccept(
  store: DocStore,
  rambleId: string,
  proposalId: string,
): Promise<void> {
  await store.mutate(async (client, doc) => {
    const res = await client.acceptTransform(doc.doc_id, rambleId, proposalId, doc.revision);
    store.applyRamble(res.ramble, res.revision);
  });
}

export async function deleteRamble(store: DocStore, rambleId: string): Promise<void> {
  await store.mutate(
    async (client, doc) => {
      const res = await client.deleteRamble(doc.doc_id, rambleId, doc.revision);
      doc.revision = res.revision;
    },
    (doc) => {
      doc.rambles = doc.rambles.filter((r) => r.ramble_id !== rambleId);
    },
  );
}
