// Browser entry point. Picks the API base from a global set in index.html,
// reuses the document id stored in the URL hash, and falls back to a typed
// prompt when no real speech source is wired up.

import { RamblekitClient } from "./api.js";
import type { DictationEvents, DictationSource } from "./mic.js";
import { DocStore } from "./store.js";
import { mountApp } from "./ui/app.js";

declare global {
  interface Window {
    RAMBLEKIT_BASE?: string;
  }
}

class PromptDictation implements DictationSource {
  start(events: DictationEvents): void {
    const text = window.prompt("Speak (type your ramble):") ?? "";
    const words = text.split(/\s+/).filter(Boolean);
    let spoken = "";
    for (const word of words) {
      spoken = spoken ? `${spoken} ${word}` : word;
      events.onPartial(spoken);
    }
    events.onFinal(text);
  }

  stop(): void {}
}

async function boot(): Promise<void> {
  const base = window.RAMBLEKIT_BASE ?? "http://127.0.0.1:8000";
  const client = new RamblekitClient(base, (input, init) => fetch(input, init));
  const store = new DocStore(client);

  const fromHash = window.location.hash.replace(/^#/, "");
  if (fromHash) {
    await store.load(fromHash);
  } else {
    const created = await client.createDocument("Untitled ramble");
    window.location.hash = created.doc_id;
    await store.load(created.doc_id);
  }

  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  mountApp(root, store, {
    micForNew: () => new PromptDictation(),
    micForRespeak: () => new PromptDictation(),
  });
}

void boot();
