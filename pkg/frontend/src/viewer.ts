/** Viewer state machine: cursor movement over a loaded trace. */

import { createdAt, elementSignature, materialize, type GraphState } from "./replay.js";
import { parseTrace, type RuleAppliedEvent, type TraceEvent } from "./trace.js";

export interface ClassStyle {
  color?: string;
  shape?: string;
  label?: string;
  visible?: boolean;
}

export interface LayoutConfig {
  containment: string[];
  classes: Record<string, ClassStyle>;
}

export const EMPTY_CONFIG: LayoutConfig = { containment: [], classes: {} };

export function parseLayoutConfig(text: string): LayoutConfig {
  const data = JSON.parse(text) as Partial<LayoutConfig>;
  return { containment: data.containment ?? [], classes: data.classes ?? {} };
}

export interface ViewerState {
  events: TraceEvent[];
  cursor: number;
  graph: GraphState;
  selection: number | null;
  config: LayoutConfig;
  notice: string | null;
}

export function loadTrace(text: string, config: LayoutConfig = EMPTY_CONFIG): ViewerState {
  const events = parseTrace(text);
  return {
    events,
    cursor: 0,
    graph: materialize(events, 0),
    selection: null,
    config,
    notice: null,
  };
}

export function step(state: ViewerState, direction: 1 | -1): ViewerState {
  const target = state.cursor + direction;
  if (target < 0 || target >= state.events.length) {
    return { ...state, notice: direction > 0 ? "already at the end" : "already at the start" };
  }
  return jumpTo(state, target);
}

export function jumpTo(state: ViewerState, cursor: number): ViewerState {
  const clamped = Math.max(0, Math.min(cursor, state.events.length - 1));
  return {
    ...state,
    cursor: clamped,
    graph: materialize(state.events, clamped),
    notice: null,
  };
}

export function jumpToEnd(state: ViewerState): ViewerState {
  return jumpTo(state, state.events.length - 1);
}

/** Ids created by the event under the cursor, highlighted in the scene. */
export function highlightIds(state: ViewerState): Set<number> {
  return createdAt(state.events, state.cursor);
}

export interface StepInfo {
  ordinal: number;
  kind: string;
  rule: string | null;
  bindings: { name: string; id: number; cls: string }[];
  emitted: string;
}

export function currentStep(state: ViewerState): StepInfo {
  const event = state.events[state.cursor];
  const info: StepInfo = {
    ordinal: event.ordinal,
    kind: event.kind,
    rule: null,
    bindings: [],
    emitted: "",
  };
  if (event.kind === "rule-applied") {
    const applied = event as RuleAppliedEvent;
    info.rule = applied.rule;
    info.bindings = Object.entries(applied.bindings)
      .map(([name, el]) => ({ name, id: el.id, cls: el.cls }))
      .sort((a, b) => a.name.localeCompare(b.name));
    info.emitted = applied.emitted;
  } else if ("rule" in event && event.rule) {
    info.rule = event.rule;
  }
  return info;
}

export function counts(state: ViewerState): { nodes: number; edges: number } {
  return { nodes: state.graph.nodes.size, edges: state.graph.edges.size };
}

export function countByClass(state: ViewerState): Map<string, number> {
  const out = new Map<string, number>();
  for (const n of state.graph.nodes.values()) {
    out.set(n.cls, (out.get(n.cls) ?? 0) + 1);
  }
  return out;
}

export function select(state: ViewerState, id: number | null): ViewerState {
  return { ...state, selection: id, notice: null };
}

export interface AttributeRow {
  id: number;
  cls: string;
  kind: "node" | "edge";
  attrs: Record<string, unknown>;
}

/** Attribute panel data for the selected element. */
export function selectedAttributes(state: ViewerState): AttributeRow | null {
  if (state.selection === null) return null;
  const node = state.graph.nodes.get(state.selection);
  if (node) return { id: node.id, cls: node.cls, kind: "node", attrs: node.attrs };
  const edge = state.graph.edges.get(state.selection);
  if (edge) return { id: edge.id, cls: edge.cls, kind: "edge", attrs: edge.attrs };
  return null;
}

/**
 * Attribute search over every live element, including elements whose class
 * is hidden by the layout config.
 */
export function attributeSearch(state: ViewerState, query: string): AttributeRow[] {
  const needle = query.toLowerCase();
  const rows: AttributeRow[] = [];
  const consider = (el: { id: number; cls: string; attrs: Record<string, unknown> }, kind: "node" | "edge") => {
    const hay = [el.cls, ...Object.values(el.attrs).map((v) => String(v))]
      .join(" ")
      .toLowerCase();
    if (hay.includes(needle)) rows.push({ id: el.id, cls: el.cls, kind, attrs: el.attrs });
  };
  for (const n of state.graph.nodes.values()) consider(n, "node");
  for (const e of state.graph.edges.values()) consider(e, "edge");
  return rows.sort((a, b) => a.id - b.id);
}

export function renderedSignature(state: ViewerState): string {
  return elementSignature(state.graph);
}
