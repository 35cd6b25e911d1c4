// Typed client for the segmentation session API. All state lives on the
// server; this module only shapes requests and decodes responses.

export interface SessionStats {
  iteration: number;
  n_sr: number;
  n_vr: number;
  j: number;
  tau: number;
  status: "running" | "converged" | "stalled";
  converged: boolean;
  stalled: boolean;
  diverged: boolean;
  can_undo: boolean;
  mode: string;
  cutting: string;
  multiscalar: string | null;
  width: number;
  height: number;
  channels: number;
  event_count: number;
}

export interface SplitEvent {
  iteration: number;
  mode: string;
  strategy: string;
  cutting: string;
  channel: string;
  region_split: number;
  cut: string;
  delta_j: number;
  n_sr: number;
  n_vr: number;
  j: number;
  tau: number;
}

export interface CreateResponse extends SessionStats {
  id: string;
}

export interface StepResponse extends SessionStats {
  events: SplitEvent[];
  committed: number;
  requested: number;
}

export interface RegionInfo {
  channel: string;
  region_id: number;
  pixel_count: number;
  mean: number[];
  best_delta_j: number;
}

export interface InspectResponse {
  x: number;
  y: number;
  regions: RegionInfo[];
}

export interface CreateOptions {
  mode: string;
  cutting: string;
  multiscalar?: string | null;
}

export interface StepSwitches {
  cutting?: string;
  multiscalar?: string;
}

export type Layer = "segmented" | "original" | "edges" | "labels";

// Non-2xx response; detail carries the server's JSON payload (for 409 on
// step that is the full stats object with partial progress).
export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: unknown) {
    super(typeof detail === "string" ? detail : `HTTP ${status}`);
    this.name = "ApiError";
  }
}

async function decode<T>(resp: Response): Promise<T> {
  if (resp.ok) {
    return resp.status === 204 ? (undefined as T) : await resp.json();
  }
  let detail: unknown = resp.statusText;
  try {
    const body = await resp.json();
    detail = body && typeof body === "object" && "detail" in body
      ? (body as { detail: unknown }).detail
      : body;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(resp.status, detail);
}

export class Api {
  constructor(private readonly base: string = "") {}

  async createSession(file: Blob, opts: CreateOptions): Promise<CreateResponse> {
    const form = new FormData();
    form.append("file", file, "image.png");
    form.append("mode", opts.mode);
    form.append("cutting", opts.cutting);
    if (opts.multiscalar) form.append("multiscalar", opts.multiscalar);
    const resp = await fetch(`${this.base}/sessions`, {
      method: "POST",
      body: form,
    });
    return decode<CreateResponse>(resp);
  }

  async state(id: string): Promise<SessionStats> {
    return decode(await fetch(`${this.base}/sessions/${id}/state`));
  }

  async step(id: string, count: number, switches: StepSwitches = {}): Promise<StepResponse> {
    const resp = await fetch(`${this.base}/sessions/${id}/step`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ count, ...switches }),
    });
    return decode<StepResponse>(resp);
  }

  async undo(id: string, count: number): Promise<SessionStats> {
    const resp = await fetch(`${this.base}/sessions/${id}/undo`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ count }),
    });
    return decode<SessionStats>(resp);
  }

  // Rendered layers are fetched by the <img> element; iteration is a
  // cache-buster so stepping refreshes the bitmap.
  renderUrl(id: string, layer: Layer, iteration: number): string {
    return `${this.base}/sessions/${id}/render?layer=${layer}&i=${iteration}`;
  }

  async inspect(id: string, x: number, y: number): Promise<InspectResponse> {
    const resp = await fetch(`${this.base}/sessions/${id}/inspect?x=${x}&y=${y}`);
    return decode<InspectResponse>(resp);
  }

  traceUrl(id: string, format: "csv" | "json"): string {
    return `${this.base}/sessions/${id}/trace?format=${format}`;
  }

  async deleteSession(id: string): Promise<void> {
    const resp = await fetch(`${this.base}/sessions/${id}`, { method: "DELETE" });
    await decode<void>(resp);
  }
}
