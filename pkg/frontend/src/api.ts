// HTTP client for the gridstab service.  All analysis happens on the
// server; this module only moves the canonical JSON documents around.
// The fetch function is injectable so the logic is testable without a
// network.

import type {
  ErrorDoc,
  FeederInfoDoc,
  HeatmapDoc,
  HeatmapRequest,
  JobDoc,
  MetricsDoc,
  SimulateDoc,
  SimulateRequest,
  SweepDoc,
  SweepRequest,
} from "./types.js";

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  status: number;
  code: string;
  detail: string;

  constructor(status: number, doc: ErrorDoc) {
    super(`${doc.error}: ${doc.detail}`);
    this.status = status;
    this.code = doc.error;
    this.detail = doc.detail;
  }
}

export class CancelledError extends Error {
  constructor() {
    super("job superseded");
  }
}

// cooperative cancellation for poll loops: the store flips `cancelled`
// when a newer configuration version supersedes the job
export interface CancelToken {
  cancelled: boolean;
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class ApiClient {
  base: string;
  private fetchFn: FetchFn;
  pollMs: number;

  constructor(base: string, fetchFn?: FetchFn, pollMs = 150) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
    this.pollMs = pollMs;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const resp = await this.fetchFn(this.base + path, init);
    const text = await resp.text();
    let doc: unknown;
    try {
      doc = JSON.parse(text);
    } catch {
      throw new ApiError(resp.status, { error: "bad_response", detail: text.slice(0, 200) });
    }
    if (resp.status >= 400) throw new ApiError(resp.status, doc as ErrorDoc);
    return doc as T;
  }

  getFeeder(): Promise<FeederInfoDoc> {
    return this.request<FeederInfoDoc>("GET", "/feeder");
  }

  metrics(feeder?: string): Promise<MetricsDoc> {
    return this.request<MetricsDoc>("POST", "/metrics", feeder ? { feeder } : {});
  }

  heatmap(req: HeatmapRequest): Promise<HeatmapDoc> {
    return this.request<HeatmapDoc>("POST", "/heatmap", { ...req, background: false });
  }

  // submit a background heatmap job and poll it to completion; the token
  // is checked before every poll so superseded jobs stop promptly
  async heatmapJob(req: HeatmapRequest, token?: CancelToken): Promise<HeatmapDoc> {
    const submitted = await this.request<{ job_id: string }>("POST", "/heatmap", {
      ...req,
      background: true,
    });
    for (;;) {
      if (token?.cancelled) throw new CancelledError();
      const job = await this.request<JobDoc>("GET", `/jobs/${submitted.job_id}`);
      if (job.status === "done" && job.result) return job.result;
      if (job.status === "error") {
        const err = job.error ?? { error: "internal", detail: "job failed" };
        throw new ApiError(422, err);
      }
      await sleep(this.pollMs);
    }
  }

  sweep(req: SweepRequest): Promise<SweepDoc> {
    return this.request<SweepDoc>("POST", "/sweep", req);
  }

  simulate(req: SimulateRequest): Promise<SimulateDoc> {
    return this.request<SimulateDoc>("POST", "/simulate", req);
  }
}
