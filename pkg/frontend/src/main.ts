// DOM entry point: wires the controls to a SessionController and renders
// the view model after every change.

import { Api } from "./api.js";
import type { InspectResponse, Layer } from "./api.js";
import { SessionController } from "./app.js";
import type { ViewHooks } from "./app.js";
import { drawChart } from "./chart.js";
import { SessionView } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const upload = el<HTMLInputElement>("upload");
const modeSel = el<HTMLSelectElement>("mode");
const cuttingSel = el<HTMLSelectElement>("cutting");
const multiscalarSel = el<HTMLSelectElement>("multiscalar");
const createBtn = el<HTMLButtonElement>("create");
const step1Btn = el<HTMLButtonElement>("step1");
const step10Btn = el<HTMLButtonElement>("step10");
const undoBtn = el<HTMLButtonElement>("undo1");
const runBtn = el<HTMLButtonElement>("run-target");
const targetKind = el<HTMLSelectElement>("target-kind");
const targetValue = el<HTMLInputElement>("target-value");
const banner = el<HTMLDivElement>("banner");
const statsPanel = el<HTMLDivElement>("stats");
const image = el<HTMLImageElement>("image");
const marker = el<HTMLDivElement>("marker");
const chartCanvas = el<HTMLCanvasElement>("chart");
const logBody = el<HTMLTableSectionElement>("log-body");
const inspectPanel = el<HTMLDivElement>("inspect-panel");
const traceLink = el<HTMLAnchorElement>("trace-link");

const view = new SessionView();
const api = new Api("");

function fmt(x: number): string {
  if (x === 0) return "0";
  const abs = Math.abs(x);
  if (abs >= 1e6 || abs < 1e-3) return x.toExponential(4);
  return x.toPrecision(6).replace(/\.?0+$/, "");
}

function statRow(label: string, value: string): string {
  return `<dt>${label}</dt><dd>${value}</dd>`;
}

function renderStats(): void {
  const s = view.stats;
  if (!s) {
    statsPanel.innerHTML = "<p>No session. Upload an image to begin.</p>";
    return;
  }
  statsPanel.innerHTML = "<dl>" +
    statRow("iteration", String(s.iteration)) +
    statRow("status", s.status) +
    statRow("J", fmt(s.j)) +
    statRow("tau", `${s.tau.toFixed(3)}%`) +
    statRow("regions (n_vr)", String(s.n_vr)) +
    statRow("scalar regions (n_sr)", String(s.n_sr)) +
    statRow("image", `${s.width} x ${s.height} x ${s.channels}`) +
    statRow("mode", s.multiscalar ? `${s.mode} / ${s.multiscalar}` : s.mode) +
    statRow("cutting", s.cutting) +
    "</dl>";
}

function renderLog(): void {
  const rows = view.events.map((e) =>
    `<tr><td>${e.iteration}</td><td>${e.channel}</td><td>${e.region_split}</td>` +
    `<td>${e.cut}</td><td>${fmt(e.delta_j)}</td><td>${fmt(e.j)}</td>` +
    `<td>${e.tau.toFixed(2)}</td><td>${e.strategy}</td></tr>`);
  logBody.innerHTML = rows.reverse().join("");
}

function renderBanner(): void {
  banner.textContent = view.banner.message;
  banner.className = `banner ${view.banner.kind}`;
  banner.hidden = view.banner.kind === "none";
}

function renderControls(): void {
  createBtn.disabled = view.busy || !upload.files || upload.files.length === 0;
  step1Btn.disabled = !view.canStep;
  step10Btn.disabled = !view.canStep;
  runBtn.disabled = !view.canStep;
  undoBtn.disabled = !view.canUndo;
  const combine = multiscalarSel.querySelector<HTMLOptionElement>(
    'option[value="combine-best-components"]');
  if (combine) combine.disabled = !view.combineAllowed;
  multiscalarSel.disabled = modeSel.value !== "multiscalar" ||
    (view.active && view.stats!.mode !== "multiscalar");
  traceLink.hidden = !view.active;
  if (view.sessionId) traceLink.href = api.traceUrl(view.sessionId, "csv");
}

function render(): void {
  renderStats();
  renderLog();
  renderBanner();
  renderControls();
  drawChart(chartCanvas, view.series);
}

function renderInspect(info: InspectResponse | null): void {
  marker.hidden = info === null;
  if (!info) {
    inspectPanel.innerHTML = "<p>Click the image to inspect a region.</p>";
    return;
  }
  const parts = info.regions.map((r) => {
    const rgb = r.mean.length === 3 ? r.mean : [r.mean[0], r.mean[0], r.mean[0]];
    const swatch = `rgb(${rgb.map((v) => Math.round(v)).join(",")})`;
    return `<dl><dt>channel</dt><dd>${r.channel}</dd>` +
      `<dt>region id</dt><dd>${r.region_id}</dd>` +
      `<dt>pixels</dt><dd>${r.pixel_count}</dd>` +
      `<dt>mean</dt><dd><span class="swatch" style="background:${swatch}"></span>` +
      ` ${r.mean.map((v) => v.toFixed(2)).join(", ")}</dd>` +
      `<dt>next-split value</dt><dd>${String(r.best_delta_j)}</dd></dl>`;
  });
  inspectPanel.innerHTML =
    `<p>pixel (${info.x}, ${info.y}); boundaries on the edges layer</p>` +
    parts.join("");
}

const hooks: ViewHooks = {
  changed: render,
  imageStale(): void {
    if (view.sessionId && view.stats) {
      image.src = api.renderUrl(view.sessionId, view.layer, view.stats.iteration);
      image.hidden = false;
    } else {
      image.hidden = true;
    }
    marker.hidden = true;
  },
  inspected: renderInspect,
};

const controller = new SessionController(api, view, hooks);

createBtn.addEventListener("click", () => {
  const file = upload.files?.[0];
  if (!file) return;
  void controller.create(file, {
    mode: modeSel.value,
    cutting: cuttingSel.value,
    multiscalar: modeSel.value === "multiscalar" ? multiscalarSel.value : null,
  });
});

function currentSwitches() {
  if (!view.active) return {};
  return view.stats!.mode === "multiscalar"
    ? { cutting: cuttingSel.value, multiscalar: multiscalarSel.value }
    : { cutting: cuttingSel.value };
}

step1Btn.addEventListener("click", () => void controller.step(1, currentSwitches()));
step10Btn.addEventListener("click", () => void controller.step(10, currentSwitches()));
undoBtn.addEventListener("click", () => void controller.undo(1));
runBtn.addEventListener("click", () => {
  const value = Number(targetValue.value);
  if (!Number.isFinite(value)) return;
  const target = targetKind.value === "tau"
    ? { kind: "tau" as const, value }
    : { kind: "n_vr" as const, value };
  void controller.runToTarget(target, currentSwitches());
});

upload.addEventListener("change", renderControls);
modeSel.addEventListener("change", renderControls);

for (const radio of document.querySelectorAll<HTMLInputElement>('input[name="layer"]')) {
  radio.addEventListener("change", () => {
    if (radio.checked) controller.setLayer(radio.value as Layer);
  });
}

image.addEventListener("click", (event) => {
  if (!view.stats) return;
  const box = image.getBoundingClientRect();
  const x = Math.floor((event.clientX - box.left) * (view.stats.width / box.width));
  const y = Math.floor((event.clientY - box.top) * (view.stats.height / box.height));
  marker.style.left = `${event.clientX - box.left - 4}px`;
  marker.style.top = `${event.clientY - box.top - 4}px`;
  void controller.inspect(x, y);
});

render();
renderInspect(null);
