// JSON document shapes exchanged with the gridstab HTTP service.
// These mirror the service's canonical documents field for field; the UI
// never derives verdicts itself, it only renders what the service sent.

export interface FeederNode {
  id: string;
  phases: string;
}

export interface FeederLine {
  from: string;
  to: string;
  phases: string;
  z: number[][][];
}

export interface FeederDoc {
  base_kv: number;
  base_mva: number;
  substation: string;
  nodes: FeederNode[];
  lines: FeederLine[];
}

export interface LayoutDoc {
  parent: Record<string, string | null>;
  depth: Record<string, number>;
  order: string[];
}

export interface FeederInfoDoc {
  feeder: FeederDoc;
  layout: LayoutDoc;
  summary: {
    base_kv: number;
    base_mva: number;
    n_lines: number;
    n_nodes: number;
    substation: string;
  };
}

export type VerdictColor = "blue" | "yellow" | "red" | "error";

export interface SamplingDoc {
  num_samples: number;
  seed: number;
  gain_range?: [number, number];
  distribution?: string;
  pbc_f22_tie?: number | null;
}

export interface BestGains {
  nodes: string[];
  f11: number[][];
  f21?: number[][];
  f22?: number[][];
}

export interface Verdict {
  node: string;
  color: VerdictColor;
  good_fraction: number;
  best_rho: number | null;
  best_gains: BestGains | null;
  error: string | null;
}

export interface HeatmapDoc {
  config: string[];
  kind: ControllerKind;
  counts: Record<VerdictColor, number>;
  sampling: SamplingDoc;
  verdicts: Verdict[];
}

export type ControllerKind = "droop" | "pbc";

export interface HeatmapRequest {
  feeder?: string;
  kind: ControllerKind;
  config?: string[];
  sampling?: SamplingDoc;
  background?: boolean;
}

export interface SweepRequest {
  family: string;
  params?: Record<string, number>;
  gains: number[] | { start: number; stop: number; num?: number; spacing?: "log" | "linear" };
}

export interface SweepDoc {
  family: string;
  params: Record<string, number>;
  a_crit: number | null;
  columns: ["a", "rho", "stable"];
  rows: [number, number, boolean][];
}

export interface GainsDoc {
  scale?: number;
  f11?: number[][];
  f21?: number[][];
  f22?: number[][];
}

export interface SimulateRequest {
  feeder?: string;
  config: string[];
  kind: ControllerKind;
  gains: GainsDoc;
  horizon?: number;
  loads?: Record<string, number[] | number[][]>;
  v_ref?: number;
  delta_ref_deg?: number;
  v_init?: number;
  delta_init_deg?: number;
  solver?: "linear" | "exact_two_bus";
  divergence_threshold?: number;
}

export interface SimulateDoc {
  kind: ControllerKind;
  solver: string;
  horizon: number;
  divergence_step: number | null;
  divergence_time_s: number | null;
  reason: string | null;
  columns: string[];
  rows: [number, number, string, string, number, number, number, number][];
}

export interface MetricsDoc {
  columns: string[];
  rows: (string | number | boolean | null)[][];
}

export interface JobDoc {
  job_id: string;
  status: "queued" | "running" | "done" | "error";
  result: HeatmapDoc | null;
  error: { error: string; detail: string } | null;
}

export interface ErrorDoc {
  error: string;
  detail: string;
}
