// SVG path construction for the side-panel plots.  Pure functions from
// service documents to path strings; main.ts only drops the results into
// the DOM.

import type { SimulateDoc, SweepDoc } from "./types.js";

export interface Frame {
  width: number;
  height: number;
  pad: number;
}

export const DEFAULT_FRAME: Frame = { width: 320, height: 180, pad: 24 };

const fmt = (v: number) => (Math.round(v * 100) / 100).toString();

export function linePath(points: { x: number; y: number }[]): string {
  if (points.length === 0) return "";
  const first = points[0];
  if (!first) return "";
  let d = `M${fmt(first.x)},${fmt(first.y)}`;
  for (let i = 1; i < points.length; i++) {
    const p = points[i];
    if (p) d += ` L${fmt(p.x)},${fmt(p.y)}`;
  }
  return d;
}

export interface SweepPlot {
  curve: string;
  unitY: number;
  acritX: number | null;
  points: { x: number; y: number; stable: boolean }[];
}

// rho vs a on a log-x axis; the horizontal line at rho = 1 is the
// stability boundary and a_crit (when the service reports one) is shown
// as a vertical marker
export function sweepPlot(doc: SweepDoc, frame: Frame = DEFAULT_FRAME): SweepPlot {
  const { width, height, pad } = frame;
  const rows = doc.rows;
  const xs = rows.map((r) => Math.log10(r[0]));
  const lo = Math.min(...xs);
  const hi = Math.max(...xs);
  const span = hi - lo || 1;
  const rhoMax = Math.max(2, ...rows.map((r) => r[1]));
  const X = (a: number) => pad + ((Math.log10(a) - lo) / span) * (width - 2 * pad);
  const Y = (rho: number) => height - pad - (Math.min(rho, rhoMax) / rhoMax) * (height - 2 * pad);
  const points = rows.map((r) => ({ x: X(r[0]), y: Y(r[1]), stable: r[2] }));
  const acrit = doc.a_crit;
  const inRange = acrit !== null && acrit >= Math.pow(10, lo) && acrit <= Math.pow(10, hi);
  return {
    curve: linePath(points),
    unitY: Y(1),
    acritX: inRange && acrit !== null ? X(acrit) : null,
    points,
  };
}

export interface TrajectoryPlot {
  series: { label: string; path: string }[];
  divergenceX: number | null;
  vmin: number;
  vmax: number;
}

// per node-phase voltage magnitude traces; a vertical marker shows where
// the run was cut off as divergent
export function trajectoryPlot(doc: SimulateDoc, frame: Frame = DEFAULT_FRAME): TrajectoryPlot {
  const { width, height, pad } = frame;
  const by = new Map<string, { t: number; v: number }[]>();
  let tmax = 0;
  let vmin = Infinity;
  let vmax = -Infinity;
  for (const row of doc.rows) {
    const [, time_s, node, phase, vmag] = row;
    const key = `${node}:${phase}`;
    let list = by.get(key);
    if (!list) {
      list = [];
      by.set(key, list);
    }
    list.push({ t: time_s, v: vmag });
    tmax = Math.max(tmax, time_s);
    vmin = Math.min(vmin, vmag);
    vmax = Math.max(vmax, vmag);
  }
  if (!isFinite(vmin)) {
    vmin = 0.9;
    vmax = 1.1;
  }
  if (vmax - vmin < 1e-6) {
    vmin -= 0.01;
    vmax += 0.01;
  }
  const X = (t: number) => pad + (t / (tmax || 1)) * (width - 2 * pad);
  const Y = (v: number) => height - pad - ((v - vmin) / (vmax - vmin)) * (height - 2 * pad);
  const series = [...by.entries()].map(([label, pts]) => ({
    label,
    path: linePath(pts.map((p) => ({ x: X(p.t), y: Y(p.v) }))),
  }));
  return {
    series,
    divergenceX: doc.divergence_time_s === null ? null : X(doc.divergence_time_s),
    vmin,
    vmax,
  };
}
