// Tidy tree layout for the feeder view.
//
// Feeder files carry no coordinates, so positions are computed here from
// the parent/depth/order document the service returns.  The algorithm is
// the classic extent-merging tidy tree: subtrees are laid out bottom-up,
// packed left to right as closely as their per-level extents allow, and
// every parent is centered over its first and last child.  Nodes at the
// same depth share a y coordinate and never sit closer than one unit.

import type { LayoutDoc } from "./types.js";

export interface NodePosition {
  x: number;
  y: number;
}

interface Extent {
  min: number;
  max: number;
}

interface SubLayout {
  offsets: Map<string, number>;
  extents: Extent[];
}

const SEPARATION = 1;

export function childrenOf(layout: LayoutDoc): Map<string, string[]> {
  const kids = new Map<string, string[]>();
  for (const id of layout.order) kids.set(id, []);
  for (const id of layout.order) {
    const p = layout.parent[id];
    if (p != null) {
      const list = kids.get(p);
      if (list === undefined) throw new Error(`layout parent ${p} not in order`);
      list.push(id);
    }
  }
  return kids;
}

function fitShift(left: Extent[], right: Extent[]): number {
  let shift = 0;
  const levels = Math.min(left.length, right.length);
  for (let i = 0; i < levels; i++) {
    const l = left[i];
    const r = right[i];
    if (l && r) shift = Math.max(shift, l.max + SEPARATION - r.min);
  }
  return shift;
}

function mergeExtents(left: Extent[], right: Extent[], shift: number): Extent[] {
  const out: Extent[] = [];
  const n = Math.max(left.length, right.length);
  for (let i = 0; i < n; i++) {
    const l = left[i];
    const r = right[i];
    if (l && r) {
      out.push({ min: Math.min(l.min, r.min + shift), max: Math.max(l.max, r.max + shift) });
    } else if (l) {
      out.push({ min: l.min, max: l.max });
    } else if (r) {
      out.push({ min: r.min + shift, max: r.max + shift });
    }
  }
  return out;
}

function build(node: string, kids: Map<string, string[]>): SubLayout {
  const cs = kids.get(node) ?? [];
  if (cs.length === 0) {
    return { offsets: new Map([[node, 0]]), extents: [{ min: 0, max: 0 }] };
  }
  const subs = cs.map((c) => build(c, kids));
  const shifts: number[] = [];
  let acc: Extent[] = [];
  for (let i = 0; i < subs.length; i++) {
    const sub = subs[i];
    if (!sub) continue;
    const s = i === 0 ? 0 : fitShift(acc, sub.extents);
    shifts.push(s);
    acc = i === 0 ? sub.extents.map((e) => ({ ...e })) : mergeExtents(acc, sub.extents, s);
  }
  const first = shifts[0] ?? 0;
  const last = shifts[shifts.length - 1] ?? 0;
  const mid = (first + last) / 2;
  const offsets = new Map<string, number>([[node, 0]]);
  for (let i = 0; i < subs.length; i++) {
    const sub = subs[i];
    const shift = shifts[i];
    if (!sub || shift === undefined) continue;
    for (const [id, off] of sub.offsets) offsets.set(id, off + shift - mid);
  }
  const extents: Extent[] = [{ min: 0, max: 0 }];
  for (const e of acc) extents.push({ min: e.min - mid, max: e.max - mid });
  return { offsets, extents };
}

export function tidyLayout(layout: LayoutDoc): Map<string, NodePosition> {
  const kids = childrenOf(layout);
  const roots = layout.order.filter((id) => layout.parent[id] == null);
  const positions = new Map<string, NodePosition>();
  let xbase = 0;
  for (const root of roots) {
    const sub = build(root, kids);
    let minx = 0;
    let maxx = 0;
    for (const e of sub.extents) {
      minx = Math.min(minx, e.min);
      maxx = Math.max(maxx, e.max);
    }
    for (const [id, off] of sub.offsets) {
      positions.set(id, { x: xbase + off - minx, y: layout.depth[id] ?? 0 });
    }
    xbase += maxx - minx + 2 * SEPARATION;
  }
  return positions;
}

export interface Edge {
  from: string;
  to: string;
}

export function edges(layout: LayoutDoc): Edge[] {
  const out: Edge[] = [];
  for (const id of layout.order) {
    const p = layout.parent[id];
    if (p != null) out.push({ from: p, to: id });
  }
  return out;
}

export interface Box {
  minX: number;
  maxX: number;
  minY: number;
  maxY: number;
}

export function boundingBox(positions: Map<string, NodePosition>): Box {
  const box: Box = { minX: 0, maxX: 0, minY: 0, maxY: 0 };
  let started = false;
  for (const p of positions.values()) {
    if (!started) {
      box.minX = box.maxX = p.x;
      box.minY = box.maxY = p.y;
      started = true;
    } else {
      box.minX = Math.min(box.minX, p.x);
      box.maxX = Math.max(box.maxX, p.x);
      box.minY = Math.min(box.minY, p.y);
      box.maxY = Math.max(box.maxY, p.y);
    }
  }
  return box;
}
