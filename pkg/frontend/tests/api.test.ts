// Wire-level checks against the live API: SSE stitching, conflict
// envelopes, and export.

import { beforeAll, describe, expect, it } from "vitest";

import { ApiError, isConflict } from "../src/api.js";
import type { SummaryEvent } from "../src/types.js";
import { client, sameOrigin, seedDocument } from "./helpers.js";

beforeAll(() => sameOrigin());

describe("api client", () => {
  it("concatenated stream chunks equal the done summary", async () => {
    const api = client();
    const doc = await seedDocument(api, "stream laws", ["Placeholder text for now."]);
    const ramble = doc.rambles[0]!;

    // replacing the text invalidates caches without regenerating, so the
    // stream below is a real cold generation, chunk by chunk
    const replaced = await api.replaceText(
      doc.doc_id,
      ramble.ramble_id,
      doc.revision,
      "Morning pages help because the editor brain is still asleep and the " +
        "words come out before judgement starts. The trick is to keep the pen " +
        "moving no matter what shows up on the page.",
    );
    expect(replaced.ramble.summaries.half).toBeNull();

    const events: SummaryEvent[] = [];
    const done = await api.streamSummary(doc.doc_id, ramble.ramble_id, "half", (ev) =>
      events.push(ev),
    );

    const deltas = events.flatMap((ev) => (ev.event === "chunk" ? [ev.delta] : []));
    expect(deltas.length).toBeGreaterThan(0);
    expect(deltas.join("")).toBe(done);
    expect(done.length).toBeGreaterThan(0);

    const after = await api.getDocument(doc.doc_id);
    expect(after.rambles[0]!.summaries.half?.text).toBe(done);
  });

  it("stale revisions come back as conflict errors", async () => {
    const api = client();
    const doc = await seedDocument(api, "conflicts", ["One sentence to edit later."]);
    const ramble = doc.rambles[0]!;

    await api.replaceText(doc.doc_id, ramble.ramble_id, doc.revision, "Edited once already.");

    let caught: unknown = null;
    try {
      await api.replaceText(doc.doc_id, ramble.ramble_id, doc.revision, "Second writer.");
    } catch (err) {
      caught = err;
    }
    expect(caught).toBeInstanceOf(ApiError);
    const apiErr = caught as ApiError;
    expect(apiErr.status).toBe(409);
    expect(apiErr.code).toBe("Conflict");
    expect(isConflict(apiErr)).toBe(true);
  });

  it("export returns the document text at a level", async () => {
    const api = client();
    const doc = await seedDocument(api, "exports", [
      "First thought lives here.",
      "Second thought follows it.",
    ]);
    const full = await api.exportText(doc.doc_id, "full");
    expect(full).toContain("First thought lives here.");
    expect(full).toContain("Second thought follows it.");
  });
});
