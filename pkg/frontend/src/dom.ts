/** Browser glue: file pickers, SVG rendering, step controls.
 * Everything testable lives in the other modules; this file only wires the
 * DOM to them. */

import { layoutScene } from "./layout.js";
import { buildScene } from "./scene.js";
import {
  EMPTY_CONFIG,
  attributeSearch,
  counts,
  currentStep,
  highlightIds,
  jumpTo,
  jumpToEnd,
  loadTrace,
  parseLayoutConfig,
  select,
  selectedAttributes,
  step,
  type LayoutConfig,
  type ViewerState,
} from "./viewer.js";

let state: ViewerState | null = null;
let config: LayoutConfig = EMPTY_CONFIG;

const $ = (id: string) => document.getElementById(id)!;

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const el = document.createElementNS("http://www.w3.org/2000/svg", tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

function render(): void {
  if (!state) return;
  const scene = buildScene(state, highlightIds(state));
  const layout = layoutScene(scene);
  const svg = $("canvas") as unknown as SVGSVGElement;
  svg.innerHTML = "";
  svg.setAttribute("viewBox", `0 0 ${Math.max(400, layout.width)} ${Math.max(300, layout.height)}`);
  for (const path of layout.edges) {
    svg.appendChild(
      svgEl("line", {
        x1: String(path.x1), y1: String(path.y1),
        x2: String(path.x2), y2: String(path.y2),
        stroke: "#888", "stroke-width": "1",
      }),
    );
  }
  for (const box of layout.boxes.sort((a, b) => a.depth - b.depth)) {
    const rect = svgEl("rect", {
      x: String(box.x), y: String(box.y),
      width: String(box.width), height: String(box.height),
      rx: box.node.shape === "ellipse" ? String(box.height / 2) : "4",
      fill: box.node.color,
      stroke: box.node.highlighted ? "#d40000" : box.node.selected ? "#0044cc" : "#333",
      "stroke-width": box.node.highlighted || box.node.selected ? "3" : "1",
      opacity: box.node.children.length ? "0.35" : "0.95",
    });
    rect.addEventListener("click", (ev) => {
      ev.stopPropagation();
      state = select(state!, box.id);
      render();
    });
    svg.appendChild(rect);
    svg.appendChild(
      Object.assign(
        svgEl("text", {
          x: String(box.x + 6),
          y: String(box.y + 14),
          "font-size": "11",
          "font-family": "monospace",
        }),
        { textContent: box.node.label },
      ),
    );
  }
  const info = currentStep(state);
  $("status").textContent =
    `step ${state.cursor}/${state.events.length - 1} — ${info.kind}` +
    (info.rule ? ` ${info.rule}` : "") +
    (state.notice ? ` (${state.notice})` : "");
  const c = counts(state);
  $("counts").textContent = `${c.nodes} nodes, ${c.edges} edges`;
  $("bindings").textContent = info.bindings
    .map((b) => `${b.name} = #${b.id}:${b.cls}`)
    .join("\n");
  $("emitted").textContent = info.emitted;
  const sel = selectedAttributes(state);
  $("attrs").textContent = sel
    ? `#${sel.id} ${sel.cls} (${sel.kind})\n` +
      Object.entries(sel.attrs).map(([k, v]) => `${k} = ${JSON.stringify(v)}`).join("\n")
    : "click an element";
}

function wire(): void {
  ($("trace-file") as HTMLInputElement).addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    try {
      state = loadTrace(await file.text(), config);
      render();
    } catch (exc) {
      $("status").textContent = String(exc);
    }
  });
  ($("layout-file") as HTMLInputElement).addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    config = parseLayoutConfig(await file.text());
    if (state) {
      state = { ...state, config };
      render();
    }
  });
  $("back").addEventListener("click", () => { if (state) { state = step(state, -1); render(); } });
  $("fwd").addEventListener("click", () => { if (state) { state = step(state, 1); render(); } });
  $("start").addEventListener("click", () => { if (state) { state = jumpTo(state, 0); render(); } });
  $("end").addEventListener("click", () => { if (state) { state = jumpToEnd(state); render(); } });
  ($("search") as HTMLInputElement).addEventListener("input", (ev) => {
    if (!state) return;
    const q = (ev.target as HTMLInputElement).value;
    $("search-out").textContent = q
      ? attributeSearch(state, q).slice(0, 20)
          .map((r) => `#${r.id} ${r.cls} ${JSON.stringify(r.attrs)}`)
          .join("\n")
      : "";
  });
}

document.addEventListener("DOMContentLoaded", wire);
