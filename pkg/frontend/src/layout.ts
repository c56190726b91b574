// Deterministic layouts: a layered left-to-right placement for the
// component graph and a nested-box layout for state trees.

import type { ModelJson, StateNode } from "./types.js";

export interface Box {
  x: number; y: number; width: number; height: number;
}

export interface ComponentLayout {
  boxes: Record<string, Box>;
  width: number;
  height: number;
}

const COMP_W = 170;
const COMP_H = 96;
const GAP_X = 120;
const GAP_Y = 36;

// Layer components by connector flow: sources left of targets when the
// graph allows it (cycles fall back to declaration order).
export function layerComponents(model: ModelJson): string[][] {
  const names = model.components.map((c) => c.name);
  const rank = new Map<string, number>(names.map((n) => [n, 0]));
  for (let pass = 0; pass < names.length; pass += 1) {
    let changed = false;
    for (const conn of model.connectors) {
      const want = (rank.get(conn.source) ?? 0) + 1;
      if ((rank.get(conn.target) ?? 0) < want && want < names.length) {
        rank.set(conn.target, want);
        changed = true;
      }
    }
    if (!changed) break;
  }
  const layers: string[][] = [];
  for (const name of names) {
    const r = Math.min(rank.get(name) ?? 0, names.length - 1);
    while (layers.length <= r) layers.push([]);
    layers[r].push(name);
  }
  return layers.filter((l) => l.length > 0);
}

export function layoutComponents(model: ModelJson): ComponentLayout {
  const layers = layerComponents(model);
  const boxes: Record<string, Box> = {};
  let width = 0;
  let height = 0;
  layers.forEach((layer, i) => {
    layer.forEach((name, j) => {
      boxes[name] = {
        x: 20 + i * (COMP_W + GAP_X),
        y: 20 + j * (COMP_H + GAP_Y),
        width: COMP_W,
        height: COMP_H,
      };
      width = Math.max(width, boxes[name].x + COMP_W + 20);
      height = Math.max(height, boxes[name].y + COMP_H + 20);
    });
  });
  return { boxes, width, height };
}

export interface Edge {
  name: string;
  x1: number; y1: number; x2: number; y2: number;
  labelX: number; labelY: number;
}

export function connectorEdges(model: ModelJson,
                               layout: ComponentLayout): Edge[] {
  // spread parallel edges between the same pair vertically
  const between = new Map<string, number>();
  const edges: Edge[] = [];
  for (const conn of model.connectors) {
    const a = layout.boxes[conn.source];
    const b = layout.boxes[conn.target];
    if (!a || !b) continue;
    const key = [conn.source, conn.target].sort().join("|");
    const k = between.get(key) ?? 0;
    between.set(key, k + 1);
    const offset = k * 16 - 8;
    const leftToRight = a.x <= b.x;
    const x1 = leftToRight ? a.x + a.width : a.x;
    const x2 = leftToRight ? b.x : b.x + b.width;
    const y1 = a.y + a.height / 2 + offset;
    const y2 = b.y + b.height / 2 + offset;
    edges.push({
      name: conn.name, x1, y1, x2, y2,
      labelX: (x1 + x2) / 2, labelY: (y1 + y2) / 2 - 6,
    });
  }
  return edges;
}

export interface StateBox extends Box {
  name: string;
  depth: number;
  leaf: boolean;
}

const LEAF_W = 120;
const LEAF_H = 34;
const PAD = 12;
const TITLE = 18;

// Nested states become containers around their children, children flow
// left to right.
export function layoutStateTree(states: StateNode[],
                                x = 10, y = 10): StateBox[] {
  const out: StateBox[] = [];
  place(states, x, y, 0, out);
  return out;
}

function place(states: StateNode[], x: number, y: number, depth: number,
               out: StateBox[]): { width: number; height: number } {
  let cursorX = x;
  let rowHeight = 0;
  for (const s of states) {
    if (s.substates.length === 0) {
      out.push({ name: s.name, x: cursorX, y, width: LEAF_W, height: LEAF_H,
                 depth, leaf: true });
      cursorX += LEAF_W + PAD;
      rowHeight = Math.max(rowHeight, LEAF_H);
    } else {
      const inner = place(s.substates, cursorX + PAD, y + TITLE + PAD,
                          depth + 1, out);
      const width = Math.max(inner.width + 2 * PAD, LEAF_W);
      const height = inner.height + TITLE + 2 * PAD;
      out.push({ name: s.name, x: cursorX, y, width, height, depth,
                 leaf: false });
      cursorX += width + PAD;
      rowHeight = Math.max(rowHeight, height);
    }
  }
  return { width: Math.max(cursorX - x - PAD, 0), height: rowHeight };
}

export function treeExtent(boxes: StateBox[]): { width: number;
                                                 height: number } {
  let width = 0;
  let height = 0;
  for (const b of boxes) {
    width = Math.max(width, b.x + b.width + 10);
    height = Math.max(height, b.y + b.height + 10);
  }
  return { width, height };
}
