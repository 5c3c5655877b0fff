// Application state: the placement stack, heatmap cache, and job
// versioning.  Every configuration change bumps a version; the heatmap
// job submitted for an older version is cancelled client side and its
// late result discarded, so the colors on screen always belong to the
// newest finished job.  Undo pops back to a cached heatmap without
// talking to the service.

import { ApiClient, ApiError, CancelledError } from "./api.js";
import type { CancelToken } from "./api.js";
import type {
  ControllerKind,
  HeatmapDoc,
  HeatmapRequest,
  SamplingDoc,
  VerdictColor,
} from "./types.js";

export interface Snapshot {
  config: string[];
  doc: HeatmapDoc | null;
}

export type Listener = () => void;

export class AppStore {
  private stack: Snapshot[] = [{ config: [], doc: null }];
  private version = 0;
  private pending: { version: number; token: CancelToken } | null = null;
  private listeners: Listener[] = [];
  lastError: ApiError | null = null;

  constructor(
    private api: ApiClient,
    public kind: ControllerKind,
    public sampling: SamplingDoc,
    public feeder?: string,
  ) {}

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  private top(): Snapshot {
    const snap = this.stack[this.stack.length - 1];
    if (!snap) throw new Error("empty snapshot stack");
    return snap;
  }

  get config(): string[] {
    return [...this.top().config];
  }

  get doc(): HeatmapDoc | null {
    return this.top().doc;
  }

  get depth(): number {
    return this.stack.length;
  }

  get busy(): boolean {
    return this.pending !== null;
  }

  // colors shown on screen: the newest finished heatmap, which may be a
  // stale one from lower in the stack while the current job runs
  colors(): Record<string, VerdictColor> {
    for (let i = this.stack.length - 1; i >= 0; i--) {
      const snap = this.stack[i];
      if (snap?.doc) {
        const out: Record<string, VerdictColor> = {};
        for (const v of snap.doc.verdicts) out[v.node] = v.color;
        return out;
      }
    }
    return {};
  }

  get showingStale(): boolean {
    return this.top().doc === null;
  }

  canPlace(node: string): boolean {
    return !this.top().config.includes(node);
  }

  requestBody(): HeatmapRequest {
    const req: HeatmapRequest = {
      kind: this.kind,
      config: this.config,
      sampling: this.sampling,
    };
    if (this.feeder !== undefined) req.feeder = this.feeder;
    return req;
  }

  private bumpVersion(): number {
    this.version += 1;
    if (this.pending) {
      this.pending.token.cancelled = true;
      this.pending = null;
    }
    return this.version;
  }

  // submit a heatmap job for the current configuration and adopt the
  // result unless a newer version superseded it meanwhile
  async refresh(): Promise<void> {
    const version = this.bumpVersion();
    const token: CancelToken = { cancelled: false };
    this.pending = { version, token };
    this.lastError = null;
    this.notify();
    try {
      const doc = await this.api.heatmapJob(this.requestBody(), token);
      if (this.version === version) {
        this.top().doc = doc;
        this.pending = null;
      }
    } catch (err) {
      if (err instanceof CancelledError) return;
      if (this.version === version) this.pending = null;
      if (err instanceof ApiError) this.lastError = err;
      else throw err;
    } finally {
      this.notify();
    }
  }

  async place(node: string): Promise<void> {
    if (!this.canPlace(node)) return;
    this.stack.push({ config: [...this.top().config, node], doc: null });
    await this.refresh();
  }

  // pop back to the previous placement; its heatmap comes straight from
  // the cache, so no request is made unless that job never finished
  async undo(): Promise<void> {
    if (this.stack.length <= 1) return;
    this.stack.pop();
    this.bumpVersion();
    this.lastError = null;
    if (this.top().doc === null) {
      await this.refresh();
      return;
    }
    this.notify();
  }

  async importConfig(config: string[]): Promise<void> {
    this.stack = [{ config: [...config], doc: null }];
    await this.refresh();
  }
}
