/**
 * Figure layout: turns aggregated curves into a backend-independent display
 * list (lines, markers, text) shared by the SVG writer and the PNG rasterizer.
 */

import type { CurvePoint } from "./aggregate.js";
import type { CurveSpec, FigureSpec } from "./figure.js";

export type Anchor = "start" | "middle" | "end";

export type Primitive =
  | { kind: "rect"; x: number; y: number; w: number; h: number; fill: string }
  | { kind: "line"; x1: number; y1: number; x2: number; y2: number;
      color: string; width: number; dash?: boolean }
  | { kind: "polyline"; points: Array<[number, number]>; color: string;
      width: number; dash?: boolean }
  | { kind: "marker"; x: number; y: number; shape: NonNullable<CurveSpec["marker"]>;
      color: string; size: number }
  | { kind: "text"; x: number; y: number; text: string; color: string;
      size: number; anchor: Anchor; vertical?: boolean };

export interface RenderedCurve {
  spec: CurveSpec;
  points: CurvePoint[];
}

export interface DisplayList {
  width: number;
  height: number;
  primitives: Primitive[];
}

/** Tick positions at 1/2/5 decades covering [lo, hi]. */
export function niceTicks(lo: number, hi: number, target = 6): number[] {
  if (!(hi > lo)) {
    const pad = Math.max(1, Math.abs(lo) * 0.1);
    return niceTicks(lo - pad, hi + pad, target);
  }
  const raw = (hi - lo) / Math.max(2, target);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (mag * m >= raw) { step = mag * m; break; }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
    ticks.push(Math.abs(v) < 1e-12 ? 0 : v);
  }
  return ticks;
}

function formatTick(v: number): string {
  const rounded = Math.round(v * 1000) / 1000;
  return String(rounded);
}

export function buildDisplayList(spec: FigureSpec, curves: RenderedCurve[],
                                 warning?: string): DisplayList {
  const W = spec.width ?? 800;
  const H = spec.height ?? 560;
  const margin = { left: 72, right: 24, top: spec.title ? 40 : 24, bottom: 56 };
  const plotW = W - margin.left - margin.right;
  const plotH = H - margin.top - margin.bottom;

  const prims: Primitive[] = [
    { kind: "rect", x: 0, y: 0, w: W, h: H, fill: "#ffffff" },
  ];

  const allPoints = curves.flatMap((c) => c.points);
  let xs = allPoints.map((p) => p.snrDb);
  let ys = allPoints.map((p) => p.meanNmseDb);
  const empty = allPoints.length === 0;
  if (empty) {
    xs = [-10, 10];
    ys = [-30, 0];
  }
  let xLo = Math.min(...xs), xHi = Math.max(...xs);
  let yLo = Math.min(...ys), yHi = Math.max(...ys);
  if (xHi - xLo < 1e-9) { xLo -= 1; xHi += 1; }
  const yPad = Math.max(1, (yHi - yLo) * 0.08);
  yLo -= yPad; yHi += yPad;

  const sx = (x: number) => margin.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) => margin.top + ((yHi - y) / (yHi - yLo)) * plotH;

  // gridlines and ticks
  for (const t of niceTicks(xLo, xHi)) {
    const x = sx(t);
    prims.push({ kind: "line", x1: x, y1: margin.top, x2: x,
                 y2: margin.top + plotH, color: "#dddddd", width: 1 });
    prims.push({ kind: "text", x, y: margin.top + plotH + 18, text: formatTick(t),
                 color: "#333333", size: 12, anchor: "middle" });
  }
  for (const t of niceTicks(yLo, yHi)) {
    const y = sy(t);
    prims.push({ kind: "line", x1: margin.left, y1: y,
                 x2: margin.left + plotW, y2: y, color: "#dddddd", width: 1 });
    prims.push({ kind: "text", x: margin.left - 8, y: y + 4, text: formatTick(t),
                 color: "#333333", size: 12, anchor: "end" });
  }

  // frame
  prims.push({ kind: "line", x1: margin.left, y1: margin.top + plotH,
               x2: margin.left + plotW, y2: margin.top + plotH,
               color: "#000000", width: 1.5 });
  prims.push({ kind: "line", x1: margin.left, y1: margin.top,
               x2: margin.left, y2: margin.top + plotH,
               color: "#000000", width: 1.5 });

  // labels and title
  prims.push({ kind: "text", x: margin.left + plotW / 2, y: H - 14,
               text: spec.xLabel ?? "SNR [dB]", color: "#000000", size: 14,
               anchor: "middle" });
  prims.push({ kind: "text", x: 20, y: margin.top + plotH / 2,
               text: spec.yLabel ?? "NMSE [dB]", color: "#000000", size: 14,
               anchor: "middle", vertical: true });
  if (spec.title) {
    prims.push({ kind: "text", x: W / 2, y: 24, text: spec.title,
                 color: "#000000", size: 16, anchor: "middle" });
  }
  if (empty) {
    prims.push({ kind: "text", x: margin.left + plotW / 2,
                 y: margin.top + plotH / 2,
                 text: warning ?? "no data rows matched",
                 color: "#aa0000", size: 14, anchor: "middle" });
  }

  // curves
  for (const curve of curves) {
    if (curve.points.length === 0) continue;
    const pts = curve.points.map((p) => [sx(p.snrDb), sy(p.meanNmseDb)] as [number, number]);
    prims.push({ kind: "polyline", points: pts, color: curve.spec.color!,
                 width: 2, dash: curve.spec.dash });
    if (curve.spec.marker !== "none") {
      for (const [x, y] of pts) {
        prims.push({ kind: "marker", x, y, shape: curve.spec.marker ?? "circle",
                     color: curve.spec.color!, size: 4.5 });
      }
    }
  }

  // legend (top-right corner of the plot area)
  const legendX = margin.left + plotW - 200;
  let legendY = margin.top + 14;
  for (const curve of curves) {
    prims.push({ kind: "line", x1: legendX, y1: legendY - 4, x2: legendX + 28,
                 y2: legendY - 4, color: curve.spec.color!, width: 2,
                 dash: curve.spec.dash });
    if (curve.spec.marker !== "none") {
      prims.push({ kind: "marker", x: legendX + 14, y: legendY - 4,
                   shape: curve.spec.marker ?? "circle",
                   color: curve.spec.color!, size: 4 });
    }
    prims.push({ kind: "text", x: legendX + 34, y: legendY, text: curve.spec.label,
                 color: "#000000", size: 12, anchor: "start" });
    legendY += 18;
  }

  return { width: W, height: H, primitives: prims };
}
