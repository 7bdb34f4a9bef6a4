// One ramble card. Mode decides the body: default shows the zoomed text
// with keyword highlights and chips, respeaking shows the grey original
// over the live buffer with exactly append/replace/discard, editing shows
// a textarea where Return splits at the caret.

import {
  deleteRamble,
  magicAccept,
  magicPropose,
  regenerate,
  respeakChoose,
  respeakStart,
  saveEdit,
  semanticSplit,
  splitAtCaret,
  toggleKeyword,
} from "../actions.js";
import { beginDrag, draggedId, endDrag } from "../dnd.js";
import { mergeOnto } from "../actions.js";
import type { DictationSource } from "../mic.js";
import { fire } from "./util.js";
import { openMagicDialog } from "./magic.js";
import type { DocStore } from "../store.js";
import type { RambleView, SummaryLevel } from "../types.js";

export interface CardDeps {
  micForRespeak: (rambleId: string) => DictationSource;
}

const RESPEAK_ACTIONS = ["append", "replace", "discard"] as const;

function highlighted(text: string, activeWords: string[]): DocumentFragment {
  const fragment = document.createDocumentFragment();
  if (!activeWords.length) {
    fragment.appendChild(document.createTextNode(text));
    return fragment;
  }
  const active = new Set(activeWords.map((w) => w.toLowerCase()));
  for (const piece of text.split(/(\s+)/)) {
    const token = piece.replace(/^\W+|\W+$/g, "").toLowerCase();
    if (token && active.has(token)) {
      const span = document.createElement("span");
      span.className = "kw-hit";
      span.textContent = piece;
      fragment.appendChild(span);
    } else {
      fragment.appendChild(document.createTextNode(piece));
    }
  }
  return fragment;
}

export function renderCard(store: DocStore, ramble: RambleView, deps: CardDeps): HTMLElement {
  const card = document.createElement("article");
  card.className = "ramble-card";
  card.dataset.rambleId = ramble.ramble_id;

  const respeaking =
    ramble.state === "respeaking" || store.respeak?.rambleId === ramble.ramble_id;
  const editing = store.editing === ramble.ramble_id;
  if (respeaking) card.classList.add("respeaking");
  if (editing) card.classList.add("editing");
  if (store.selection.has(ramble.ramble_id)) card.classList.add("selected");

  card.draggable = !respeaking && !editing;
  card.addEventListener("dragstart", () => beginDrag(ramble.ramble_id));
  card.addEventListener("dragend", () => endDrag());
  card.addEventListener("dragover", (ev) => ev.preventDefault());
  card.addEventListener("drop", (ev) => {
    ev.preventDefault();
    ev.stopPropagation();
    const source = draggedId();
    endDrag();
    if (source && source !== ramble.ramble_id) fire(mergeOnto(store, ramble.ramble_id, source));
  });

  if (respeaking) {
    card.appendChild(respeakBody(store, ramble));
    return card;
  }
  if (editing) {
    card.appendChild(editBody(store, ramble));
    return card;
  }

  card.appendChild(toolbar(store, ramble, deps));
  card.appendChild(defaultBody(store, ramble));
  return card;
}

function toolbar(store: DocStore, ramble: RambleView, deps: CardDeps): HTMLElement {
  const bar = document.createElement("div");
  bar.className = "card-actions";

  const add = (cls: string, label: string, title: string, onClick: () => void) => {
    const btn = document.createElement("button");
    btn.className = cls;
    btn.textContent = label;
    btn.title = title;
    btn.addEventListener("click", onClick);
    bar.appendChild(btn);
  };

  add("act-respeak", "\u{1F399}", "Respeak", () => {
    fire(respeakStart(store, ramble.ramble_id, deps.micForRespeak(ramble.ramble_id)));
  });
  add("act-edit", "✎", "Edit", () => store.setEditing(ramble.ramble_id));
  add("act-split", "✂", "Split by content", () => {
    fire(semanticSplit(store, ramble.ramble_id));
  });
  add("act-magic", "✨", "Custom prompt", () => {
    let proposalId: string | null = null;
    openMagicDialog(cardHost(store, ramble.ramble_id), {
      propose: async (prompt, includeKeywords) => {
        const res = await magicPropose(store, ramble.ramble_id, prompt, includeKeywords);
        proposalId = res.proposalId;
        return res.candidate;
      },
      accept: async () => {
        if (proposalId) await magicAccept(store, ramble.ramble_id, proposalId);
      },
    });
  });
  add("act-regenerate", "↻", "Regenerate summaries", () => {
    fire(regenerate(store, ramble.ramble_id));
  });
  add("act-select", "▣", "Select for merge", () => store.toggleSelected(ramble.ramble_id));
  add("act-delete", "✕", "Delete", () => fire(deleteRamble(store, ramble.ramble_id)));
  return bar;
}

// the dialog needs a stable parent that survives re-renders
function cardHost(store: DocStore, rambleId: string): HTMLElement {
  const selector = `[data-ramble-id="${rambleId}"]`;
  return (document.querySelector(selector) as HTMLElement) ?? document.body;
}

function defaultBody(store: DocStore, ramble: RambleView): HTMLElement {
  const body = document.createElement("div");
  body.className = "card-body";

  const text = document.createElement("div");
  text.className = "card-text";
  if (store.capture?.rambleId === ramble.ramble_id) {
    text.classList.add("capturing");
    text.textContent = store.capture.text;
  } else {
    const view = store.displayText(ramble);
    if (view.pending) text.classList.add("pending");
    text.appendChild(highlighted(view.text, ramble.active_keywords));
  }
  body.appendChild(text);

  const level = store.zoom !== "full" ? (store.zoom as SummaryLevel) : null;
  const stream = level ? store.streams.get(ramble.ramble_id)?.get(level) : undefined;
  if (stream?.failed) {
    const fallback = document.createElement("div");
    fallback.className = "stream-fallback";
    fallback.textContent = ramble.text;
    body.appendChild(fallback);
    const retry = document.createElement("button");
    retry.className = "stream-retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => {
      if (level) fire(store.streamOne(ramble.ramble_id, level));
    });
    body.appendChild(retry);
  }

  const chips = document.createElement("div");
  chips.className = "keyword-chips";
  for (const keyword of ramble.keywords) {
    const chip = document.createElement("span");
    chip.className = "chip" + (keyword.active ? " active" : "");
    chip.dataset.word = keyword.word;
    chip.textContent = keyword.word;
    chip.addEventListener("click", () => fire(toggleKeyword(store, ramble.ramble_id, keyword.word)));
    chips.appendChild(chip);
  }
  body.appendChild(chips);
  return body;
}

function respeakBody(store: DocStore, ramble: RambleView): HTMLElement {
  const body = document.createElement("div");
  body.className = "respeak-body";

  const original = document.createElement("div");
  original.className = "respeak-original";
  original.textContent = store.respeak?.rambleId === ramble.ramble_id
    ? store.respeak.original
    : ramble.text;
  body.appendChild(original);

  const live = document.createElement("div");
  live.className = "respeak-live";
  live.textContent = store.respeak?.rambleId === ramble.ramble_id ? store.respeak.buffer : "";
  body.appendChild(live);

  const actions = document.createElement("div");
  actions.className = "respeak-actions";
  for (const mode of RESPEAK_ACTIONS) {
    const btn = document.createElement("button");
    btn.className = `respeak-${mode}`;
    btn.textContent = mode;
    btn.addEventListener("click", () => fire(respeakChoose(store, ramble.ramble_id, mode)));
    actions.appendChild(btn);
  }
  body.appendChild(actions);
  return body;
}

function editBody(store: DocStore, ramble: RambleView): HTMLElement {
  const body = document.createElement("div");
  body.className = "edit-body";

  const area = document.createElement("textarea");
  area.className = "edit-area";
  area.value = ramble.text;
  area.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") {
      ev.preventDefault();
      const caret = area.selectionStart ?? 0;
      fire(splitAtCaret(store, ramble.ramble_id, area.value, caret));
    }
  });
  body.appendChild(area);

  const save = document.createElement("button");
  save.className = "edit-save";
  save.textContent = "Save";
  save.addEventListener("click", () => fire(saveEdit(store, ramble.ramble_id, area.value)));
  body.appendChild(save);

  const cancel = document.createElement("button");
  cancel.className = "edit-cancel";
  cancel.textContent = "Cancel";
  cancel.addEventListener("click", () => store.setEditing(null));
  body.appendChild(cancel);
  return body;
}
