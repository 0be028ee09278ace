/** Scene construction: visible elements, nesting groups, colors, labels. */

import type { GraphState } from "./replay.js";
import type { LayoutConfig, ViewerState } from "./viewer.js";

export interface SceneNode {
  id: number;
  cls: string;
  label: string;
  color: string;
  shape: string;
  highlighted: boolean;
  selected: boolean;
  children: SceneNode[];
}

export interface SceneEdge {
  id: number;
  cls: string;
  label: string;
  color: string;
  src: number;
  tgt: number;
  highlighted: boolean;
}

export interface Scene {
  roots: SceneNode[];
  edges: SceneEdge[];
}

const DEFAULT_COLOR = "#dddddd";
const DEFAULT_SHAPE = "box";

function style(config: LayoutConfig, cls: string) {
  return config.classes[cls] ?? {};
}

function label(
  el: { cls: string; attrs: Record<string, unknown> },
  config: LayoutConfig,
): string {
  const template = style(config, el.cls).label;
  if (template === undefined) return el.cls;
  return template.replace(/\{(\w+)\}/g, (_, attr) => {
    const value = el.attrs[attr];
    return value === undefined ? "" : String(value);
  });
}

function visible(config: LayoutConfig, cls: string): boolean {
  return style(config, cls).visible !== false;
}

/**
 * Containment parent map over visible nodes: the first containment edge to
 * each child wins; a cycle is broken by dropping the closing link.
 */
export function containmentParents(
  graph: GraphState,
  config: LayoutConfig,
  hidden: Set<number>,
): Map<number, number> {
  const containment = new Set(config.containment);
  const parent = new Map<number, number>();
  const edges = [...graph.edges.values()].sort((a, b) => a.id - b.id);
  for (const edge of edges) {
    if (!containment.has(edge.cls)) continue;
    if (hidden.has(edge.src) || hidden.has(edge.tgt)) continue;
    if (!parent.has(edge.tgt)) parent.set(edge.tgt, edge.src);
  }
  for (const start of parent.keys()) {
    const seen = new Set<number>();
    let cur: number | undefined = start;
    let prev: number | undefined;
    while (cur !== undefined && parent.has(cur)) {
      if (seen.has(cur)) {
        parent.delete(prev!);
        break;
      }
      seen.add(cur);
      prev = cur;
      cur = parent.get(cur);
    }
  }
  return parent;
}

export function buildScene(
  state: ViewerState,
  highlight: Set<number> = new Set(),
): Scene {
  const { graph, config } = state;
  const hidden = new Set<number>();
  for (const n of graph.nodes.values()) {
    if (!visible(config, n.cls)) hidden.add(n.id);
  }
  const parents = containmentParents(graph, config, hidden);
  const children = new Map<number, number[]>();
  for (const [child, holder] of parents) {
    const bucket = children.get(holder) ?? [];
    bucket.push(child);
    children.set(holder, bucket);
  }

  const makeNode = (id: number): SceneNode => {
    const rec = graph.nodes.get(id)!;
    const s = style(config, rec.cls);
    return {
      id,
      cls: rec.cls,
      label: label(rec, config),
      color: s.color ?? DEFAULT_COLOR,
      shape: s.shape ?? DEFAULT_SHAPE,
      highlighted: highlight.has(id),
      selected: state.selection === id,
      children: (children.get(id) ?? [])
        .sort((a, b) => a - b)
        .map((kid) => makeNode(kid)),
    };
  };

  const roots: SceneNode[] = [];
  const ids = [...graph.nodes.keys()].sort((a, b) => a - b);
  for (const id of ids) {
    if (hidden.has(id) || parents.has(id)) continue;
    roots.push(makeNode(id));
  }

  const containment = new Set(config.containment);
  const edges: SceneEdge[] = [];
  const edgeIds = [...graph.edges.keys()].sort((a, b) => a - b);
  for (const id of edgeIds) {
    const rec = graph.edges.get(id)!;
    if (containment.has(rec.cls)) continue;
    if (!visible(config, rec.cls)) continue;
    if (hidden.has(rec.src) || hidden.has(rec.tgt)) continue;
    edges.push({
      id,
      cls: rec.cls,
      label: label(rec, config),
      color: style(config, rec.cls).color ?? "#666666",
      src: rec.src,
      tgt: rec.tgt,
      highlighted: highlight.has(id),
    });
  }
  return { roots, edges };
}

export function sceneNodeIds(scene: Scene): Set<number> {
  const out = new Set<number>();
  const walk = (node: SceneNode) => {
    out.add(node.id);
    node.children.forEach(walk);
  };
  scene.roots.forEach(walk);
  return out;
}
