// Two-bus equivalents for the inspect panel.  A node's gain-sweep curve
// is the sweep of the two-bus family parameterized by that node's
// path-cumulative impedance metrics, which is how path metrics predict
// per-node stability in the first place.  The metric values come from
// the service's metrics document; nothing is recomputed here.

import type { ControllerKind, MetricsDoc, SweepRequest } from "./types.js";

export interface PathMetrics {
  d_mean: number;
  cx_mean: number;
  l1: number;
  l2: number;
}

function col(doc: MetricsDoc, name: string): number {
  const i = doc.columns.indexOf(name);
  if (i < 0) throw new Error(`metrics document has no column ${name}`);
  return i;
}

export function pathMetrics(doc: MetricsDoc, node: string): PathMetrics | null {
  const scope = col(doc, "scope");
  const id = col(doc, "id");
  const row = doc.rows.find((r) => r[scope] === "path" && r[id] === node);
  if (!row) return null;
  const num = (name: string): number => {
    const v = row[col(doc, name)];
    return typeof v === "number" && isFinite(v) ? v : NaN;
  };
  const l1s = ["l1_a", "l1_b", "l1_c"].map(num).filter((v) => !isNaN(v));
  return {
    d_mean: num("d_mean"),
    cx_mean: num("cx_mean"),
    l1: l1s.length ? l1s.reduce((a, b) => a + b, 0) / l1s.length : NaN,
    l2: num("l2"),
  };
}

// the sweep grid mirrors the sampler's calibrated gain range so the
// curve covers exactly the gains the heatmap drew from
export const SWEEP_GRID = { start: 0.01, stop: 50, num: 60, spacing: "log" as const };

export function rxSweepRequest(kind: ControllerKind, m: PathMetrics): SweepRequest {
  return {
    family: `${kind}_rx`,
    params: { d: m.d_mean, l1: m.l1 },
    gains: SWEEP_GRID,
  };
}

export function phaseSweepRequest(kind: ControllerKind, m: PathMetrics): SweepRequest {
  return {
    family: `${kind}_phase`,
    params: { c_x: m.cx_mean, l2: m.l2 },
    gains: SWEEP_GRID,
  };
}
