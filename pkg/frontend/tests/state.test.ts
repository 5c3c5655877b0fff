import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import type { FetchFn } from "../src/api.js";
import { AppStore } from "../src/state.js";
import type { ErrorDoc, HeatmapDoc, HeatmapRequest, VerdictColor } from "../src/types.js";

function json(status: number, doc: unknown): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "content-type": "application/json" },
  });
}

// one verdict node whose color depends on how many controllers are
// placed, so each snapshot in the stack has distinguishable colors
function makeDoc(req: HeatmapRequest): HeatmapDoc {
  const config = req.config ?? [];
  const byDepth: VerdictColor[] = ["red", "yellow", "blue"];
  const color = byDepth[Math.min(config.length, 2)] ?? "blue";
  const counts = { blue: 0, yellow: 0, red: 0, error: 0 };
  counts[color] += 1;
  return {
    config,
    kind: req.kind,
    counts,
    sampling: req.sampling ?? { num_samples: 1, seed: 0 },
    verdicts: [
      {
        node: "probe",
        color,
        good_fraction: config.length,
        best_rho: 0.5,
        best_gains: null,
        error: null,
      },
    ],
  };
}

// in-memory stand-in for the service's background job protocol
class FakeService {
  requests: Record<string, unknown>[] = [];
  autoComplete = true;
  failNext: ErrorDoc | null = null;
  private jobs: { done: boolean; req: HeatmapRequest }[] = [];

  fetchFn: FetchFn = (url, init) => {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    if (method === "POST" && path === "/heatmap") {
      const body = JSON.parse(String(init?.body)) as Record<string, unknown>;
      this.requests.push(body);
      if (this.failNext) {
        const doc = this.failNext;
        this.failNext = null;
        return Promise.resolve(json(422, doc));
      }
      const id = this.jobs.length;
      this.jobs.push({ done: this.autoComplete, req: body as unknown as HeatmapRequest });
      return Promise.resolve(json(202, { job_id: `j${id}`, status: "queued" }));
    }
    const m = path.match(/^\/jobs\/j(\d+)$/);
    if (method === "GET" && m) {
      const job = this.jobs[Number(m[1])];
      if (!job) return Promise.resolve(json(404, { error: "not_found", detail: path }));
      if (!job.done) {
        return Promise.resolve(
          json(200, { job_id: `j${m[1]}`, status: "running", result: null, error: null }),
        );
      }
      return Promise.resolve(
        json(200, { job_id: `j${m[1]}`, status: "done", result: makeDoc(job.req), error: null }),
      );
    }
    return Promise.resolve(json(404, { error: "not_found", detail: path }));
  };

  complete(i: number): void {
    const job = this.jobs[i];
    if (job) job.done = true;
  }

  completeAll(): void {
    for (const job of this.jobs) job.done = true;
  }
}

function makeStore(feeder?: string): { svc: FakeService; store: AppStore } {
  const svc = new FakeService();
  const api = new ApiClient("http://svc:1", svc.fetchFn, 1);
  const store = new AppStore(api, "pbc", { num_samples: 5, seed: 0 }, feeder);
  return { svc, store };
}

const settle = () => new Promise<void>((resolve) => setTimeout(resolve, 15));

describe("AppStore refresh and place", () => {
  it("submits the current configuration and adopts the result", async () => {
    const { svc, store } = makeStore("two_bus");
    await store.refresh();
    expect(svc.requests[0]).toEqual({
      kind: "pbc",
      config: [],
      sampling: { num_samples: 5, seed: 0 },
      feeder: "two_bus",
      background: true,
    });
    expect(store.busy).toBe(false);
    expect(store.colors()).toEqual({ probe: "red" });
  });

  it("grows the configuration one placement at a time", async () => {
    const { svc, store } = makeStore();
    await store.refresh();
    await store.place("a");
    await store.place("b");
    expect(svc.requests.map((r) => r["config"])).toEqual([[], ["a"], ["a", "b"]]);
    expect(store.depth).toBe(3);
    expect(store.config).toEqual(["a", "b"]);
    expect(store.colors()).toEqual({ probe: "blue" });
  });

  it("refuses to place the same node twice", async () => {
    const { svc, store } = makeStore();
    await store.refresh();
    await store.place("a");
    expect(store.canPlace("a")).toBe(false);
    await store.place("a");
    expect(store.depth).toBe(2);
    expect(svc.requests).toHaveLength(2);
  });

  it("keeps the previous colors, marked stale, while a job runs", async () => {
    const { svc, store } = makeStore();
    await store.refresh();
    svc.autoComplete = false;
    const placed = store.place("a");
    expect(store.busy).toBe(true);
    expect(store.showingStale).toBe(true);
    expect(store.doc).toBeNull();
    expect(store.colors()).toEqual({ probe: "red" });
    svc.completeAll();
    await placed;
    expect(store.busy).toBe(false);
    expect(store.showingStale).toBe(false);
    expect(store.colors()).toEqual({ probe: "yellow" });
  });
});

describe("AppStore undo", () => {
  it("restores cached colors without another request", async () => {
    const { svc, store } = makeStore();
    await store.refresh();
    await store.place("a");
    const before = store.colors();
    expect(svc.requests).toHaveLength(2);
    await store.undo();
    expect(svc.requests).toHaveLength(2);
    expect(store.depth).toBe(1);
    expect(store.colors()).toEqual({ probe: "red" });
    expect(store.colors()).not.toEqual(before);
    expect(store.showingStale).toBe(false);
  });

  it("re-submits when the popped snapshot never finished", async () => {
    const { svc, store } = makeStore();
    svc.autoComplete = false;
    const first = store.refresh();
    await settle();
    const second = store.place("a");
    await settle();
    const undone = store.undo();
    await settle();
    svc.completeAll();
    await Promise.all([first, second, undone]);
    expect(svc.requests.map((r) => r["config"])).toEqual([[], ["a"], []]);
    expect(store.depth).toBe(1);
    expect(store.colors()).toEqual({ probe: "red" });
  });

  it("does nothing at the bottom of the stack", async () => {
    const { svc, store } = makeStore();
    await store.refresh();
    await store.undo();
    expect(store.depth).toBe(1);
    expect(svc.requests).toHaveLength(1);
  });
});

describe("AppStore job supersession", () => {
  it("discards the superseded job and keeps the newest result", async () => {
    const { svc, store } = makeStore();
    svc.autoComplete = false;
    const first = store.place("a");
    await settle();
    const second = store.place("b");
    await settle();
    svc.complete(0);
    await settle();
    expect(store.colors()).toEqual({});
    expect(store.busy).toBe(true);
    svc.complete(1);
    await Promise.all([first, second]);
    expect(store.config).toEqual(["a", "b"]);
    expect(store.colors()).toEqual({ probe: "blue" });
    expect(store.lastError).toBeNull();
    expect(store.busy).toBe(false);
  });
});

describe("AppStore errors and import", () => {
  it("surfaces a rejected request and recovers on undo", async () => {
    const { svc, store } = makeStore();
    await store.refresh();
    svc.failNext = { error: "domain", detail: "unknown node zzz" };
    await store.place("zzz");
    expect(store.lastError?.code).toBe("domain");
    expect(store.busy).toBe(false);
    expect(store.showingStale).toBe(true);
    expect(store.colors()).toEqual({ probe: "red" });
    await store.undo();
    expect(store.lastError).toBeNull();
    expect(store.showingStale).toBe(false);
    expect(svc.requests).toHaveLength(2);
  });

  it("replaces the stack on import", async () => {
    const { svc, store } = makeStore();
    await store.refresh();
    await store.place("a");
    await store.importConfig(["x", "y"]);
    expect(store.depth).toBe(1);
    expect(store.config).toEqual(["x", "y"]);
    expect(svc.requests[2]?.["config"]).toEqual(["x", "y"]);
    expect(store.colors()).toEqual({ probe: "blue" });
  });

  it("notifies subscribers on every state change", async () => {
    const { store } = makeStore();
    let calls = 0;
    store.subscribe(() => {
      calls += 1;
    });
    await store.refresh();
    expect(calls).toBeGreaterThanOrEqual(2);
  });
});
