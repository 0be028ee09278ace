/** Deterministic nested-box layout: children packed in a grid inside their
 * container, siblings flowing left to right.  No physics, so a scene always
 * lays out the same way. */

import type { Scene, SceneNode } from "./scene.js";

export interface Box {
  id: number;
  x: number;
  y: number;
  width: number;
  height: number;
  depth: number;
  node: SceneNode;
}

export interface EdgePath {
  id: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface Layout {
  boxes: Box[];
  edges: EdgePath[];
  width: number;
  height: number;
}

const LEAF_W = 120;
const LEAF_H = 36;
const PAD = 10;
const GAP = 8;
const TITLE = 18;

interface Sized {
  node: SceneNode;
  width: number;
  height: number;
  children: Sized[];
}

function measure(node: SceneNode): Sized {
  if (node.children.length === 0) {
    return { node, width: LEAF_W, height: LEAF_H, children: [] };
  }
  const kids = node.children.map(measure);
  const cols = Math.max(1, Math.ceil(Math.sqrt(kids.length)));
  const colWidths: number[] = [];
  const rowHeights: number[] = [];
  kids.forEach((kid, i) => {
    const c = i % cols;
    const r = Math.floor(i / cols);
    colWidths[c] = Math.max(colWidths[c] ?? 0, kid.width);
    rowHeights[r] = Math.max(rowHeights[r] ?? 0, kid.height);
  });
  const width = Math.max(
    LEAF_W,
    colWidths.reduce((a, b) => a + b, 0) + GAP * (colWidths.length - 1) + 2 * PAD,
  );
  const height =
    TITLE + rowHeights.reduce((a, b) => a + b, 0) + GAP * (rowHeights.length - 1) + 2 * PAD;
  return { node, width, height, children: kids };
}

function place(sized: Sized, x: number, y: number, depth: number, out: Box[]): void {
  out.push({
    id: sized.node.id,
    x,
    y,
    width: sized.width,
    height: sized.height,
    depth,
    node: sized.node,
  });
  if (sized.children.length === 0) return;
  const cols = Math.max(1, Math.ceil(Math.sqrt(sized.children.length)));
  const colWidths: number[] = [];
  const rowHeights: number[] = [];
  sized.children.forEach((kid, i) => {
    const c = i % cols;
    const r = Math.floor(i / cols);
    colWidths[c] = Math.max(colWidths[c] ?? 0, kid.width);
    rowHeights[r] = Math.max(rowHeights[r] ?? 0, kid.height);
  });
  sized.children.forEach((kid, i) => {
    const c = i % cols;
    const r = Math.floor(i / cols);
    const dx = x + PAD + colWidths.slice(0, c).reduce((a, b) => a + b, 0) + GAP * c;
    const dy = y + TITLE + PAD + rowHeights.slice(0, r).reduce((a, b) => a + b, 0) + GAP * r;
    place(kid, dx, dy, depth + 1, out);
  });
}

export function layoutScene(scene: Scene): Layout {
  const sized = scene.roots.map(measure);
  const boxes: Box[] = [];
  let x = GAP;
  let height = 0;
  for (const s of sized) {
    place(s, x, GAP, 0, boxes);
    x += s.width + GAP;
    height = Math.max(height, s.height);
  }
  const byId = new Map(boxes.map((b) => [b.id, b]));
  const edges: EdgePath[] = [];
  for (const edge of scene.edges) {
    const a = byId.get(edge.src);
    const b = byId.get(edge.tgt);
    if (!a || !b) continue;
    edges.push({
      id: edge.id,
      x1: a.x + a.width / 2,
      y1: a.y + a.height / 2,
      x2: b.x + b.width / 2,
      y2: b.y + b.height / 2,
    });
  }
  return { boxes, edges, width: x, height: height + 2 * GAP };
}
