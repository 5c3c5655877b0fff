// DOM wiring.  All decisions live in the tested modules (layout, state,
// palette, plots, equivalents); this file only reads documents out of
// them and pokes the results into SVG and form elements.

import { ApiClient, ApiError } from "./api.js";
import { exportConfig, importConfig } from "./config_io.js";
import { pathMetrics, phaseSweepRequest, rxSweepRequest } from "./equivalents.js";
import { boundingBox, edges, tidyLayout } from "./layout.js";
import type { NodePosition } from "./layout.js";
import { DEFAULT_PALETTE, paint, togglePalette } from "./palette.js";
import type { Palette } from "./palette.js";
import { DEFAULT_FRAME, sweepPlot, trajectoryPlot } from "./plots.js";
import { AppStore } from "./state.js";
import type {
  BestGains,
  ControllerKind,
  FeederInfoDoc,
  GainsDoc,
  MetricsDoc,
  SamplingDoc,
} from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const X_STEP = 46;
const Y_STEP = 64;
const MARGIN = 36;

function el<K extends keyof HTMLElementTagNameMap>(id: string): HTMLElementTagNameMap[K] {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as HTMLElementTagNameMap[K];
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function px(p: NodePosition): { x: number; y: number } {
  return { x: MARGIN + p.x * X_STEP, y: MARGIN + p.y * Y_STEP };
}

function scaledGains(bg: BestGains, scale: number): GainsDoc {
  const mul = (t: number[][]) => t.map((row) => row.map((v) => v * scale));
  const out: GainsDoc = { f11: mul(bg.f11) };
  if (bg.f21) out.f21 = mul(bg.f21);
  if (bg.f22) out.f22 = mul(bg.f22);
  return out;
}

async function boot(): Promise<void> {
  const query = new URLSearchParams(location.search);
  const api = new ApiClient(query.get("api") ?? "");
  const status = el<"div">("status");
  const errorBox = el<"div">("error");

  let info: FeederInfoDoc;
  let metricsDoc: MetricsDoc;
  try {
    info = await api.getFeeder();
    metricsDoc = await api.metrics();
  } catch (err) {
    status.textContent = `service unreachable: ${String(err)}`;
    return;
  }

  const kindSelect = el<"select">("kind");
  const samplesInput = el<"input">("samples");
  const seedInput = el<"input">("seed");
  const sampling = (): SamplingDoc => ({
    num_samples: Number(samplesInput.value) || 50,
    seed: Number(seedInput.value) || 0,
  });

  let palette: Palette = DEFAULT_PALETTE;
  let selected: string | null = null;
  let store = new AppStore(api, kindSelect.value as ControllerKind, sampling());

  const positions = tidyLayout(info.layout);
  const box = boundingBox(positions);
  const svg = el<"div">("tree");
  const root = svgEl("svg", {
    width: String(2 * MARGIN + (box.maxX - box.minX) * X_STEP),
    height: String(2 * MARGIN + (box.maxY - box.minY) * Y_STEP),
  });
  svg.appendChild(root);

  for (const e of edges(info.layout)) {
    const a = positions.get(e.from);
    const b = positions.get(e.to);
    if (!a || !b) continue;
    const pa = px(a);
    const pb = px(b);
    root.appendChild(
      svgEl("line", {
        x1: String(pa.x), y1: String(pa.y), x2: String(pb.x), y2: String(pb.y),
        stroke: "#bbb", "stroke-width": "1",
      }),
    );
  }

  const circles = new Map<string, SVGElement>();
  const phasesOf = new Map(info.feeder.nodes.map((n) => [n.id, n.phases]));
  for (const [id, pos] of positions) {
    const p = px(pos);
    const g = svgEl("g", { cursor: "pointer" });
    const circle = svgEl("circle", {
      cx: String(p.x), cy: String(p.y), r: id === info.feeder.substation ? "7" : "9",
      stroke: "#444", "stroke-width": "1",
    });
    g.appendChild(circle);
    const label = svgEl("text", {
      x: String(p.x), y: String(p.y + 21), "text-anchor": "middle", "font-size": "9",
    });
    label.textContent = id;
    g.appendChild(label);
    const badge = svgEl("text", {
      x: String(p.x), y: String(p.y - 12), "text-anchor": "middle",
      "font-size": "8", fill: "#777",
    });
    badge.textContent = phasesOf.get(id) ?? "";
    g.appendChild(badge);
    if (id !== info.feeder.substation) {
      g.addEventListener("click", () => void inspect(id));
    }
    circles.set(id, circle);
    root.appendChild(g);
  }

  function render(): void {
    const colors = store.colors();
    const cfg = new Set(store.config);
    for (const [id, circle] of circles) {
      if (id === info.feeder.substation) {
        circle.setAttribute("fill", "#333");
        continue;
      }
      const style = paint(colors[id] ?? null, palette, store.showingStale);
      circle.setAttribute("fill", style.fill);
      circle.setAttribute("opacity", String(style.opacity));
      circle.setAttribute("stroke", cfg.has(id) ? "#000" : "#444");
      circle.setAttribute("stroke-width", cfg.has(id) ? "3" : "1");
    }
    status.textContent = store.busy
      ? "heatmap job running, colors are stale"
      : `config [${store.config.join(", ")}]  kind ${store.kind}  seed ${store.sampling.seed}`;
    errorBox.textContent = store.lastError
      ? `${store.lastError.code}: ${store.lastError.detail}`
      : "";
    el<"button">("undo").disabled = store.depth <= 1;
    const place = el<"button">("place");
    place.disabled = selected === null || !store.canPlace(selected);
  }

  async function inspect(node: string): Promise<void> {
    selected = node;
    el<"div">("inspect-title").textContent = node;
    render();
    const sweepBox = el<"div">("sweep-plot");
    const trajBox = el<"div">("traj-plot");
    const m = pathMetrics(metricsDoc, node);
    if (!m) {
      sweepBox.textContent = "no metrics for this node";
      return;
    }
    el<"div">("inspect-metrics").textContent =
      `path d ${m.d_mean.toFixed(3)}  c_x ${m.cx_mean.toFixed(3)}  ` +
      `L1 ${m.l1.toFixed(4)}  L2 ${m.l2.toFixed(4)}`;
    try {
      const kind = store.kind;
      const req = m.cx_mean > m.d_mean ? phaseSweepRequest(kind, m) : rxSweepRequest(kind, m);
      const doc = await api.sweep(req);
      const plot = sweepPlot(doc);
      sweepBox.innerHTML = "";
      const f = DEFAULT_FRAME;
      const s = svgEl("svg", { width: String(f.width), height: String(f.height) });
      s.appendChild(svgEl("line", {
        x1: String(f.pad), y1: String(plot.unitY),
        x2: String(f.width - f.pad), y2: String(plot.unitY),
        stroke: "#999", "stroke-dasharray": "4 3",
      }));
      if (plot.acritX !== null) {
        s.appendChild(svgEl("line", {
          x1: String(plot.acritX), y1: String(f.pad),
          x2: String(plot.acritX), y2: String(f.height - f.pad),
          stroke: "#c33", "stroke-dasharray": "2 3",
        }));
      }
      s.appendChild(svgEl("path", {
        d: plot.curve, fill: "none", stroke: "#333", "stroke-width": "1.5",
      }));
      sweepBox.appendChild(s);
    } catch (err) {
      sweepBox.textContent = err instanceof ApiError ? `no curve: ${err.code}` : "no curve";
    }
    const verdict = store.doc?.verdicts.find((v) => v.node === node);
    if (!verdict || !verdict.best_gains) {
      trajBox.textContent = "no sampled gains for this node yet";
      return;
    }
    trajBox.innerHTML = "";
    for (const scale of [0.9, 1.1]) {
      try {
        const doc = await api.simulate({
          config: verdict.best_gains.nodes,
          kind: store.kind,
          gains: scaledGains(verdict.best_gains, scale),
          horizon: 60,
          v_init: 0.963,
        });
        const plot = trajectoryPlot(doc);
        const f = DEFAULT_FRAME;
        const s = svgEl("svg", { width: String(f.width), height: String(f.height) });
        for (const series of plot.series) {
          s.appendChild(svgEl("path", {
            d: series.path, fill: "none", stroke: "#369", "stroke-width": "1",
          }));
        }
        if (plot.divergenceX !== null) {
          s.appendChild(svgEl("line", {
            x1: String(plot.divergenceX), y1: String(f.pad),
            x2: String(plot.divergenceX), y2: String(f.height - f.pad),
            stroke: "#c33",
          }));
        }
        const cap = document.createElement("div");
        cap.textContent = `${scale} x best gains` +
          (doc.divergence_step === null ? "" : `, diverges at step ${doc.divergence_step}`);
        trajBox.appendChild(cap);
        trajBox.appendChild(s);
      } catch (err) {
        const cap = document.createElement("div");
        cap.textContent = err instanceof ApiError
          ? `${scale} x best gains: ${err.code}`
          : `${scale} x best gains: no trajectory`;
        trajBox.appendChild(cap);
      }
    }
  }

  store.subscribe(render);
  el<"button">("place").addEventListener("click", () => {
    if (selected) void store.place(selected);
  });
  el<"button">("undo").addEventListener("click", () => void store.undo());
  el<"button">("palette").addEventListener("click", () => {
    palette = togglePalette(palette);
    el<"button">("palette").textContent = `palette: ${palette.name}`;
    render();
  });
  el<"button">("export").addEventListener("click", () => {
    el<"textarea">("config-box").value = exportConfig(store.config);
  });
  el<"button">("import").addEventListener("click", () => {
    try {
      const cfg = importConfig(el<"textarea">("config-box").value);
      void store.importConfig(cfg);
    } catch (err) {
      errorBox.textContent = String(err);
    }
  });
  const resubmit = (): void => {
    store = new AppStore(api, kindSelect.value as ControllerKind, sampling());
    store.subscribe(render);
    void store.refresh();
  };
  kindSelect.addEventListener("change", resubmit);
  samplesInput.addEventListener("change", resubmit);
  seedInput.addEventListener("change", resubmit);

  await store.refresh();
}

void boot();
