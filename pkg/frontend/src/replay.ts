/** Event-sourced graph reconstruction: snapshot plus deltas up to a cursor. */

import type { EdgeRec, NodeRec, TraceEvent } from "./trace.js";

export interface GraphState {
  nodes: Map<number, NodeRec>;
  edges: Map<number, EdgeRec>;
}

function cloneNode(n: NodeRec): NodeRec {
  return { ...n, attrs: { ...n.attrs } };
}

function cloneEdge(e: EdgeRec): EdgeRec {
  return { ...e, attrs: { ...e.attrs } };
}

/**
 * Graph state after applying events[0..cursor] inclusive.  Always recomputes
 * from the snapshot, so stepping backward cannot drift from the forward
 * materialization.
 */
export function materialize(events: TraceEvent[], cursor: number): GraphState {
  if (events.length === 0 || events[0].kind !== "snapshot") {
    throw new Error("trace must start with a snapshot record");
  }
  const snapshot = events[0];
  const nodes = new Map<number, NodeRec>(snapshot.graph.nodes.map((n) => [n.id, cloneNode(n)]));
  const edges = new Map<number, EdgeRec>(snapshot.graph.edges.map((e) => [e.id, cloneEdge(e)]));
  for (let i = 1; i <= cursor && i < events.length; i++) {
    const event = events[i];
    if (event.kind !== "rule-applied") continue;
    for (const n of event.delta.createdNodes) nodes.set(n.id, cloneNode(n));
    for (const e of event.delta.createdEdges) edges.set(e.id, cloneEdge(e));
    for (const d of event.delta.deleted) {
      (d.kind === "node" ? nodes : edges).delete(d.id);
    }
    for (const change of event.delta.attrChanges) {
      const el = nodes.get(change.el) ?? edges.get(change.el);
      if (!el) throw new Error(`attribute change for unknown element ${change.el}`);
      el.attrs[change.attr] = change.value;
    }
  }
  return { nodes, edges };
}

/** Ids of elements the event at `cursor` created (for highlighting). */
export function createdAt(events: TraceEvent[], cursor: number): Set<number> {
  const out = new Set<number>();
  const event = events[cursor];
  if (event && event.kind === "rule-applied") {
    for (const n of event.delta.createdNodes) out.add(n.id);
    for (const e of event.delta.createdEdges) out.add(e.id);
  }
  return out;
}

export function elementSignature(state: GraphState): string {
  const nodeIds = [...state.nodes.keys()].sort((a, b) => a - b);
  const edgeIds = [...state.edges.keys()].sort((a, b) => a - b);
  return JSON.stringify([nodeIds, edgeIds]);
}
