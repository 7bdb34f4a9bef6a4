// Root view. Renders the whole document from store state on every change:
// title, ramble cards separated by drop gaps, and the bottom bar with the
// mic button, semantic merge, and the zoom slider.

import { reorderToGap, semanticMergeSelection, startNewRamble } from "../actions.js";
import { draggedId, endDrag } from "../dnd.js";
import { fire } from "./util.js";
import type { DictationSource } from "../mic.js";
import { renderCard } from "./card.js";
import { renderSlider } from "./slider.js";
import type { DocStore } from "../store.js";

export interface AppDeps {
  micForNew: () => DictationSource;
  micForRespeak: (rambleId: string) => DictationSource;
}

export function mountApp(root: HTMLElement, store: DocStore, deps: AppDeps): () => void {
  const render = () => renderApp(root, store, deps);
  const unsubscribe = store.subscribe(render);
  render();
  return unsubscribe;
}

function renderApp(root: HTMLElement, store: DocStore, deps: AppDeps): void {
  root.textContent = "";
  root.className = "ramblekit-app";

  const doc = store.doc;
  if (!doc) {
    const empty = document.createElement("div");
    empty.className = "loading";
    empty.textContent = "Loading document…";
    root.appendChild(empty);
    return;
  }

  const header = document.createElement("header");
  header.className = "doc-header";
  const title = document.createElement("h1");
  title.className = "doc-title";
  title.textContent = doc.title;
  header.appendChild(title);
  root.appendChild(header);

  const list = document.createElement("main");
  list.className = "ramble-list";
  list.appendChild(dropGap(store, 0));
  doc.rambles.forEach((ramble, index) => {
    list.appendChild(renderCard(store, ramble, deps));
    list.appendChild(dropGap(store, index + 1));
  });
  root.appendChild(list);

  root.appendChild(bottomBar(store, deps));

  if (store.toast) {
    const toast = document.createElement("div");
    toast.className = `toast toast-${store.toast.kind}`;
    toast.textContent = store.toast.message;
    root.appendChild(toast);
  }
}

function dropGap(store: DocStore, gapIndex: number): HTMLElement {
  const gap = document.createElement("div");
  gap.className = "drop-gap";
  gap.dataset.gapIndex = String(gapIndex);
  gap.addEventListener("dragover", (ev) => {
    ev.preventDefault();
    gap.classList.add("over");
  });
  gap.addEventListener("dragleave", () => gap.classList.remove("over"));
  gap.addEventListener("drop", (ev) => {
    ev.preventDefault();
    const source = draggedId();
    endDrag();
    if (source) fire(reorderToGap(store, source, gapIndex));
  });
  return gap;
}

function bottomBar(store: DocStore, deps: AppDeps): HTMLElement {
  const bar = document.createElement("footer");
  bar.className = "bottom-bar";

  const mic = document.createElement("button");
  mic.className = "new-ramble";
  mic.textContent = "\u{1F3A4} New ramble";
  mic.addEventListener("click", () => fire(startNewRamble(store, deps.micForNew())));
  bar.appendChild(mic);

  const merge = document.createElement("button");
  merge.className = "merge-selected";
  merge.textContent = "Merge selected";
  merge.disabled = store.selection.size < 2;
  merge.addEventListener("click", () => fire(semanticMergeSelection(store)));
  bar.appendChild(merge);

  bar.appendChild(renderSlider(store.zoom, (stop) => store.setZoom(stop)));
  return bar;
}
