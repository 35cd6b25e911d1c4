// Session controller: glue between the API client and the view model.
// DOM-free so the round-trip behavior is testable; main.ts supplies the
// hooks that touch the document.

import { Api, ApiError } from "./api.js";
import type {
  CreateOptions,
  InspectResponse,
  Layer,
  StepResponse,
  StepSwitches,
} from "./api.js";
import { SessionView } from "./state.js";

export interface ViewHooks {
  // view model changed (stats, banner, events, chart, busy flag)
  changed(): void;
  // the displayed bitmap is out of date (iteration or layer changed)
  imageStale(): void;
  inspected(info: InspectResponse | null): void;
}

export type RunTarget =
  | { kind: "tau"; value: number }
  | { kind: "n_vr"; value: number };

const RUN_CAP = 10_000;

export class SessionController {
  constructor(
    readonly api: Api,
    readonly view: SessionView,
    private readonly hooks: ViewHooks,
  ) {}

  private async mutate<T>(work: () => Promise<T>): Promise<T | null> {
    if (this.view.busy) return null;
    this.view.busy = true;
    this.view.clearError();
    this.hooks.changed();
    try {
      return await work();
    } catch (err) {
      if (err instanceof ApiError) {
        this.view.setError(typeof err.detail === "string"
          ? err.detail
          : err.message);
      } else {
        this.view.setError(String(err));
      }
      return null;
    } finally {
      this.view.busy = false;
      this.hooks.changed();
    }
  }

  async create(file: Blob, opts: CreateOptions): Promise<void> {
    const previous = this.view.sessionId;
    await this.mutate(async () => {
      const created = await this.api.createSession(file, opts);
      this.view.start(created.id, created);
      this.hooks.inspected(null);
      this.hooks.imageStale();
      if (previous !== null) {
        this.api.deleteSession(previous).catch(() => undefined);
      }
    });
  }

  // Drop switch fields that match the current state so a plain step
  // stays a plain step.
  private effectiveSwitches(switches: StepSwitches): StepSwitches {
    const stats = this.view.stats;
    const out: StepSwitches = {};
    if (switches.cutting && switches.cutting !== stats?.cutting) {
      out.cutting = switches.cutting;
    }
    if (switches.multiscalar && switches.multiscalar !== stats?.multiscalar) {
      out.multiscalar = switches.multiscalar;
    }
    return out;
  }

  private async stepOnce(count: number, switches: StepSwitches): Promise<boolean> {
    const id = this.view.sessionId!;
    try {
      const resp = await this.api.step(id, count, this.effectiveSwitches(switches));
      this.view.applyStep(resp);
      return true;
    } catch (err) {
      // 409 carries the authoritative state (terminal status or partial
      // progress); anything else is a real error
      if (err instanceof ApiError && err.status === 409 &&
          err.detail !== null && typeof err.detail === "object") {
        this.view.applyStep(err.detail as StepResponse);
        return false;
      }
      throw err;
    }
  }

  async step(count: number, switches: StepSwitches = {}): Promise<void> {
    if (!this.view.active) return;
    await this.mutate(async () => {
      await this.stepOnce(count, switches);
      this.hooks.imageStale();
    });
  }

  // Step one split at a time until the requested fidelity is reached or
  // the run ends; the stats after each response decide whether to go on.
  async runToTarget(target: RunTarget, switches: StepSwitches = {}): Promise<void> {
    if (!this.view.active) return;
    const reached = () => {
      const stats = this.view.stats!;
      return target.kind === "tau"
        ? stats.tau >= target.value
        : stats.n_vr >= target.value;
    };
    await this.mutate(async () => {
      let budget = RUN_CAP;
      while (!reached() && this.view.stats!.status === "running" && budget > 0) {
        budget -= 1;
        if (!(await this.stepOnce(1, switches))) break;
      }
      this.hooks.imageStale();
    });
  }

  async undo(count: number): Promise<void> {
    if (!this.view.canUndo) return;
    await this.mutate(async () => {
      const stats = await this.api.undo(this.view.sessionId!, count);
      this.view.applyStats(stats);
      this.hooks.inspected(null);
      this.hooks.imageStale();
    });
  }

  setLayer(layer: Layer): void {
    if (this.view.layer === layer) return;
    this.view.layer = layer;
    this.hooks.imageStale();
    this.hooks.changed();
  }

  // Pixel coordinates in image space; clicks outside the image are
  // ignored rather than surfaced as errors.
  async inspect(x: number, y: number): Promise<void> {
    const stats = this.view.stats;
    if (!this.view.active || this.view.busy) return;
    if (!stats || x < 0 || y < 0 || x >= stats.width || y >= stats.height) return;
    try {
      this.hooks.inspected(await this.api.inspect(this.view.sessionId!, x, y));
    } catch {
      this.hooks.inspected(null);
    }
  }
}
