// The semantic zoom slider: a range input with exactly four stops. Full on
// the left shows committed text and never touches the network; the other
// stops show progressively tighter summaries.

import { ZOOM_STOPS, type ZoomStop } from "../types.js";

export function renderSlider(current: ZoomStop, onChange: (stop: ZoomStop) => void): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "zoom-slider";

  const input = document.createElement("input");
  input.type = "range";
  input.min = "0";
  input.max = String(ZOOM_STOPS.length - 1);
  input.step = "1";
  input.value = String(ZOOM_STOPS.indexOf(current));
  input.setAttribute("aria-label", "Semantic zoom");
  input.addEventListener("input", () => {
    const stop = ZOOM_STOPS[Number(input.value)];
    if (stop) onChange(stop);
  });
  wrap.appendChild(input);

  const labels = document.createElement("div");
  labels.className = "zoom-labels";
  for (const stop of ZOOM_STOPS) {
    const label = document.createElement("span");
    label.className = "zoom-stop" + (stop === current ? " active" : "");
    label.dataset.stop = stop;
    label.textContent = stop;
    label.addEventListener("click", () => onChange(stop));
    labels.appendChild(label);
  }
  wrap.appendChild(labels);
  return wrap;
}
