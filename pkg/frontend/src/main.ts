/**
 * DOM wiring. Everything interesting lives in controller/plot/picker;
 * this file only reads inputs, forwards events, and paints state.
 */

import { NnsClient } from "./api.js";
import { AppController } from "./controller.js";
import {
  PlotRect,
  Range,
  cycleTickXs,
  gapSegments,
  maskRuns,
  polylinePx,
  spanRects,
  xRangeOf,
  xToPx,
  yRangeOf,
} from "./plot.js";
import { PlacedLandmark, hitTest, placeLandmarks } from "./picker.js";
import { reportLines } from "./report.js";
import type { FilterDraft, QuantDraft } from "./validation.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const client = new NnsClient("");
const controller = new AppController(client, render);

// ==========================================
// CANVAS PANELS
// ==========================================

const rawCanvas = $<HTMLCanvasElement>("raw-plot");
const filteredCanvas = $<HTMLCanvasElement>("filtered-plot");
const pickerCanvas = $<HTMLCanvasElement>("picker");
let placed: PlacedLandmark[] = [];

function plotRect(canvas: HTMLCanvasElement): PlotRect {
  return { left: 36, top: 10, width: canvas.width - 48,
           height: canvas.height - 30 };
}

function clearCanvas(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

function strokeSegments(ctx: CanvasRenderingContext2D, t: number[],
                        v: (number | null)[], xDomain: Range, yDomain: Range,
                        rect: PlotRect, color: string): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.2;
  for (const seg of gapSegments(t, v)) {
    const pts = polylinePx(seg, xDomain, yDomain, rect);
    ctx.beginPath();
    for (let i = 0; i < pts.length; i += 2) {
      if (i === 0) ctx.moveTo(pts[0], pts[1]);
      else ctx.lineTo(pts[i], pts[i + 1]);
    }
    ctx.stroke();
  }
}

function drawAxes(ctx: CanvasRenderingContext2D, rect: PlotRect,
                  xDomain: Range, yDomain: Range, unit: string): void {
  ctx.strokeStyle = "#d7dde4";
  ctx.strokeRect(rect.left, rect.top, rect.width, rect.height);
  ctx.fillStyle = "#6b7684";
  ctx.font = "11px system-ui";
  ctx.fillText(`${xDomain[0].toFixed(1)} s`, rect.left, rect.top + rect.height + 14);
  const endLabel = `${xDomain[1].toFixed(1)} s`;
  ctx.fillText(endLabel,
               rect.left + rect.width - ctx.measureText(endLabel).width,
               rect.top + rect.height + 14);
  ctx.save();
  ctx.translate(10, rect.top + rect.height / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(unit, -ctx.measureText(unit).width / 2, 0);
  ctx.restore();
}

function drawPanels(): void {
  const sig = controller.state.signal;
  const rawCtx = clearCanvas(rawCanvas);
  const filtCtx = clearCanvas(filteredCanvas);
  if (!sig) {
    rawCtx.fillStyle = "#6b7684";
    rawCtx.fillText("no session loaded", 20, 30);
    return;
  }
  const xDomain = xRangeOf(sig.timestamps_s);
  const rawRect = plotRect(rawCanvas);
  const filtRect = plotRect(filteredCanvas);

  // raw panel: interpolated stretches shaded behind the trace
  const rawDomain = yRangeOf(sig.raw);
  rawCtx.fillStyle = "rgba(196, 152, 38, 0.25)";
  for (const [s, e] of maskRuns(sig.interpolated)) {
    const x0 = xToPx(sig.timestamps_s[s], xDomain, rawRect);
    const x1 = xToPx(sig.timestamps_s[Math.max(e - 1, s)], xDomain, rawRect);
    rawCtx.fillRect(x0, rawRect.top, Math.max(x1 - x0, 1), rawRect.height);
  }
  drawAxes(rawCtx, rawRect, xDomain, rawDomain, sig.unit);
  strokeSegments(rawCtx, sig.timestamps_s, sig.raw, xDomain, rawDomain,
                 rawRect, "#2a6fb0");

  // filtered panel shares the x-range with the raw panel
  if (sig.filtered) {
    const filtDomain = yRangeOf(sig.filtered);
    const report = controller.state.report;
    if (report && !controller.state.reportStale) {
      filtCtx.fillStyle = "rgba(42, 111, 176, 0.18)";
      for (const r of spanRects(report.bursts, xDomain, filtRect)) {
        filtCtx.fillRect(r.x, filtRect.top, r.width, filtRect.height);
      }
      filtCtx.strokeStyle = "#c2452d";
      for (const x of cycleTickXs(report.bursts, xDomain, filtRect)) {
        filtCtx.beginPath();
        filtCtx.moveTo(x, filtRect.top);
        filtCtx.lineTo(x, filtRect.top + 10);
        filtCtx.stroke();
      }
    }
    drawAxes(filtCtx, filtRect, xDomain, filtDomain, sig.unit);
    strokeSegments(filtCtx, sig.timestamps_s, sig.filtered, xDomain,
                   filtDomain, filtRect, "#1d8a5f");
  } else {
    drawAxes(filtCtx, filtRect, xDomain, [-1, 1], sig.unit);
    filtCtx.fillStyle = "#6b7684";
    filtCtx.fillText("apply a filter to populate this panel",
                     filtRect.left + 12, filtRect.top + 24);
  }
}

function drawPicker(): void {
  const ctx = clearCanvas(pickerCanvas);
  if (!controller.annotation) return;
  placed = placeLandmarks(controller.annotation.landmarks,
                          pickerCanvas.width, pickerCanvas.height);
  for (const lm of placed) {
    const selected = lm.id === controller.state.landmarkId;
    ctx.beginPath();
    ctx.arc(lm.px, lm.py, selected ? 5 : 3, 0, 2 * Math.PI);
    ctx.fillStyle = selected ? "#c2452d"
      : lm.region === "jaw" ? "#2a6fb0" : "#9db3c7";
    ctx.fill();
  }
}

// ==========================================
// STATE → DOM
// ==========================================

const FILTER_KEYS = ["low", "high", "order", "filter"] as const;
const QUANT_KEYS = ["min_peak_distance_s", "max_intra_burst_gap_s",
                    "min_cycles_per_burst", "quant"] as const;

function render(): void {
  const st = controller.state;

  const banner = $<HTMLDivElement>("banner");
  banner.hidden = controller.banner === null;
  banner.textContent = controller.banner ?? "";

  const status = $<HTMLSpanElement>("session-status");
  if (st.session) {
    const s = st.session;
    const frames = s.frame_count !== null ? `, ${s.frame_count} frames` : "";
    status.textContent =
      `${s.source_id ?? s.session_id}: ${s.status}${frames}` +
      (controller.busy ? " …" : "");
  } else {
    status.textContent = controller.busy ? "uploading…" : "no session";
  }

  for (const key of [...FILTER_KEYS, ...QUANT_KEYS, "model", "mode"]) {
    const el = document.getElementById(`err-${key}`);
    if (el) el.textContent = controller.fieldErrors[key] ?? "";
  }

  $<HTMLSpanElement>("signal-stale").hidden = !st.signalStale;
  $<HTMLSpanElement>("report-stale").hidden = !st.reportStale;

  const label = $<HTMLDivElement>("picker-label");
  const lm = controller.annotation?.landmarks.find(
    (p) => p.id === st.landmarkId);
  label.textContent = lm
    ? `landmark ${lm.id} (${lm.region})`
    : `landmark ${st.landmarkId}`;

  $<HTMLPreElement>("report").textContent =
    st.report ? reportLines(st.report).join("\n") : "no report yet";

  drawPicker();
  drawPanels();
}

// ==========================================
// CONTROLS → CONTROLLER
// ==========================================

function numberField(id: keyof FilterDraft & string, key: string): void {
  $<HTMLInputElement>(key).addEventListener("input", (ev) => {
    const input = ev.target as HTMLInputElement;
    controller.setFilterField(id, input.valueAsNumber as never);
  });
}

numberField("low_cut_hz", "low");
numberField("high_cut_hz", "high");
numberField("order", "order");
$<HTMLInputElement>("causal").addEventListener("change", (ev) => {
  controller.setFilterField("causal", (ev.target as HTMLInputElement).checked);
});

function quantField(id: keyof QuantDraft & string): void {
  $<HTMLInputElement>(id).addEventListener("input", (ev) => {
    const input = ev.target as HTMLInputElement;
    controller.setQuantField(id, input.valueAsNumber as never);
  });
}

quantField("min_peak_distance_s");
quantField("max_intra_burst_gap_s");
quantField("min_cycles_per_burst");
$<HTMLSelectElement>("threshold_mode").addEventListener("change", (ev) => {
  controller.setQuantField(
    "threshold_mode",
    (ev.target as HTMLSelectElement).value as "mean_abs" | "mean_raw");
});

$<HTMLSelectElement>("mode").addEventListener("change", (ev) => {
  void controller.selectMode((ev.target as HTMLSelectElement).value);
});

$<HTMLButtonElement>("apply-filter").addEventListener("click", () => {
  void controller.applyFilter();
});
$<HTMLButtonElement>("quantify").addEventListener("click", () => {
  void controller.quantify();
});

pickerCanvas.addEventListener("click", (ev) => {
  const box = pickerCanvas.getBoundingClientRect();
  const hit = hitTest(placed, ev.clientX - box.left, ev.clientY - box.top);
  if (hit) void controller.selectLandmark(hit.id);
});

$<HTMLButtonElement>("load-demo").addEventListener("click", async () => {
  const resp = await fetch("demo-trajectory.csv");
  if (!resp.ok) {
    controller.banner = "bundled demo trajectory not found";
    render();
    return;
  }
  const csv = await resp.text();
  await controller.upload(csv, $<HTMLInputElement>("model-name").value);
});

$<HTMLInputElement>("csv-file").addEventListener("change", async (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  const csv = await file.text();
  await controller.upload(csv, $<HTMLInputElement>("model-name").value,
                          file.name.replace(/\.csv$/i, ""));
});

void controller.loadAnnotation();
render();
