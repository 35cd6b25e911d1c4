// Client-side view of one session. Stats always mirror the latest server
// response; nothing here recomputes J or tau. The chart series and the
// event log are accumulated from step responses and truncated on undo,
// keyed by the server-reported iteration.

import type { Layer, SessionStats, SplitEvent, StepResponse } from "./api.js";

export interface ChartPoint {
  iteration: number;
  tau: number;
  // log10 of the misfit, or null once J reaches 0 (converged runs end
  // with a gap rather than a fake floor value)
  logJ: number | null;
}

export function chartPoint(iteration: number, j: number, tau: number): ChartPoint {
  return { iteration, tau, logJ: j > 0 ? Math.log10(j) : null };
}

export type BannerKind = "none" | "converged" | "stalled" | "error";

export interface Banner {
  kind: BannerKind;
  message: string;
}

const NO_BANNER: Banner = { kind: "none", message: "" };

const STATS_KEYS = [
  "iteration", "n_sr", "n_vr", "j", "tau", "status", "converged", "stalled",
  "diverged", "can_undo", "mode", "cutting", "multiscalar", "width",
  "height", "channels", "event_count",
] as const;

// Step and create responses carry the stats plus extras (id, events,
// committed); the view keeps exactly the /state schema.
function pickStats(payload: SessionStats): SessionStats {
  const out: Record<string, unknown> = {};
  for (const key of STATS_KEYS) out[key] = payload[key];
  return out as unknown as SessionStats;
}

export class SessionView {
  sessionId: string | null = null;
  stats: SessionStats | null = null;
  layer: Layer = "segmented";
  events: SplitEvent[] = [];
  series: ChartPoint[] = [];
  banner: Banner = NO_BANNER;
  busy = false;

  start(id: string, stats: SessionStats): void {
    this.sessionId = id;
    this.events = [];
    this.series = [chartPoint(stats.iteration, stats.j, stats.tau)];
    this.banner = NO_BANNER;
    this.applyStats(stats);
  }

  // Replace the displayed stats wholesale and reconcile the derived
  // series: an undo rewinds the server iteration, so drop everything
  // the server no longer knows about.
  applyStats(stats: SessionStats): void {
    this.stats = pickStats(stats);
    this.events = this.events.filter((e) => e.iteration <= stats.iteration);
    this.series = this.series.filter((p) => p.iteration <= stats.iteration);
    if (this.series.length === 0 ||
        this.series[this.series.length - 1].iteration < stats.iteration) {
      this.series.push(chartPoint(stats.iteration, stats.j, stats.tau));
    }
    if (stats.converged) {
      this.banner = {
        kind: "converged",
        message: "Converged: every region is a single color; J = 0.",
      };
    } else if (stats.stalled) {
      this.banner = {
        kind: "stalled",
        message: "Stalled: no axis cut improves any region. " +
          "Switch to the overall-best strategy to continue.",
      };
    } else if (this.banner.kind !== "error") {
      this.banner = NO_BANNER;
    }
  }

  applyStep(resp: StepResponse): void {
    for (const event of resp.events) {
      this.events.push(event);
      this.series.push(chartPoint(event.iteration, event.j, event.tau));
    }
    this.applyStats(resp);
  }

  setError(message: string): void {
    this.banner = { kind: "error", message };
  }

  clearError(): void {
    if (this.banner.kind === "error") this.banner = NO_BANNER;
  }

  get active(): boolean {
    return this.sessionId !== null && this.stats !== null;
  }

  get canStep(): boolean {
    return this.active && !this.busy && this.stats!.status === "running";
  }

  get canUndo(): boolean {
    return this.active && !this.busy && this.stats!.can_undo;
  }

  // The superimposing commit policy needs coinciding channel partitions;
  // the selector disables it once the server reports divergence.
  get combineAllowed(): boolean {
    return !this.active || !this.stats!.diverged;
  }
}
