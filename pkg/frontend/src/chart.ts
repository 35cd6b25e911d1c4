// Progress chart: tau (percent, right axis) and log10(J) (left axis)
// against the iteration number. Layout math is separated from canvas
// drawing so it can be tested without a DOM.

import type { ChartPoint } from "./state.js";

const PAD = { left: 46, right: 40, top: 12, bottom: 26 };

export interface Range {
  min: number;
  max: number;
}

export interface ChartLayout {
  width: number;
  height: number;
  iterations: Range;
  logJ: Range | null;
  x(iteration: number): number;
  yTau(tau: number): number;
  yLogJ(value: number): number;
  tauPath: Array<[number, number]>;
  // log10(J) is undefined at J = 0, so the line may end early; segments
  // hold the consecutive stretches with a defined value
  logJSegments: Array<Array<[number, number]>>;
  xTicks: number[];
}

function spread(values: number[]): Range {
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  return { min, max };
}

export function integerTicks(range: Range, most: number): number[] {
  const span = Math.max(1, Math.ceil(range.max) - Math.floor(range.min));
  const step = Math.max(1, Math.ceil(span / most));
  const ticks: number[] = [];
  for (let v = Math.ceil(range.min); v <= range.max; v += step) {
    // Math.ceil(-0.5) is -0; normalize so consumers see plain 0
    ticks.push(v === 0 ? 0 : v);
  }
  return ticks;
}

export function chartLayout(points: ChartPoint[], width: number, height: number): ChartLayout {
  const innerW = Math.max(1, width - PAD.left - PAD.right);
  const innerH = Math.max(1, height - PAD.top - PAD.bottom);
  const iterations = points.length > 0
    ? spread(points.map((p) => p.iteration))
    : { min: 0, max: 1 };
  const logValues = points.map((p) => p.logJ).filter((v): v is number => v !== null);
  const logJ = logValues.length > 0 ? spread(logValues) : null;

  const x = (it: number) =>
    PAD.left + ((it - iterations.min) / (iterations.max - iterations.min)) * innerW;
  const yTau = (tau: number) => PAD.top + (1 - tau / 100) * innerH;
  const yLogJ = (v: number) =>
    logJ === null
      ? PAD.top + innerH
      : PAD.top + (1 - (v - logJ.min) / (logJ.max - logJ.min)) * innerH;

  const tauPath = points.map((p): [number, number] => [x(p.iteration), yTau(p.tau)]);
  const logJSegments: Array<Array<[number, number]>> = [];
  let current: Array<[number, number]> = [];
  for (const p of points) {
    if (p.logJ === null) {
      if (current.length > 0) logJSegments.push(current);
      current = [];
    } else {
      current.push([x(p.iteration), yLogJ(p.logJ)]);
    }
  }
  if (current.length > 0) logJSegments.push(current);

  return {
    width,
    height,
    iterations,
    logJ,
    x,
    yTau,
    yLogJ,
    tauPath,
    logJSegments,
    xTicks: integerTicks(iterations, 8),
  };
}

function polyline(ctx: CanvasRenderingContext2D, path: Array<[number, number]>, color: string): void {
  if (path.length === 0) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(path[0][0], path[0][1]);
  for (let i = 1; i < path.length; i++) ctx.lineTo(path[i][0], path[i][1]);
  ctx.stroke();
  if (path.length === 1) {
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(path[0][0], path[0][1], 2.5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

export const TAU_COLOR = "#2f7d32";
export const LOGJ_COLOR = "#8c4a98";

export function drawChart(canvas: HTMLCanvasElement, points: ChartPoint[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  const layout = chartLayout(points, width, height);
  ctx.clearRect(0, 0, width, height);
  ctx.font = "10px sans-serif";

  // frame and horizontal gridlines on the tau scale
  ctx.strokeStyle = "#ccc";
  ctx.fillStyle = "#666";
  ctx.lineWidth = 1;
  for (const tau of [0, 25, 50, 75, 100]) {
    const y = layout.yTau(tau);
    ctx.beginPath();
    ctx.moveTo(PAD.left, y);
    ctx.lineTo(width - PAD.right, y);
    ctx.stroke();
    ctx.textAlign = "left";
    ctx.fillText(`${tau}%`, width - PAD.right + 4, y + 3);
  }
  ctx.textAlign = "center";
  for (const it of layout.xTicks) {
    ctx.fillText(String(it), layout.x(it), height - PAD.bottom + 14);
  }
  if (layout.logJ !== null) {
    ctx.textAlign = "right";
    ctx.fillStyle = LOGJ_COLOR;
    for (const v of [layout.logJ.min, layout.logJ.max]) {
      ctx.fillText(v.toFixed(1), PAD.left - 4, layout.yLogJ(v) + 3);
    }
  }
  ctx.fillStyle = "#666";
  ctx.textAlign = "center";
  ctx.fillText("iteration", (PAD.left + width - PAD.right) / 2, height - 4);

  for (const segment of layout.logJSegments) {
    polyline(ctx, segment, LOGJ_COLOR);
  }
  polyline(ctx, layout.tauPath, TAU_COLOR);
}
