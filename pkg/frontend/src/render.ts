/** Orchestration: CSV + figure spec -> aggregated curves -> SVG and PNG files. */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { aggregate } from "./aggregate.js";
import type { FigureSpec } from "./figure.js";
import { buildDisplayList, type RenderedCurve } from "./plot.js";
import { encodePng } from "./png.js";
import { rasterize } from "./raster.js";
import { parseCsv, type ResultRow } from "./schema.js";
import { toSvg } from "./svg.js";

export interface RenderResult {
  svgPath: string;
  pngPath: string;
  curves: RenderedCurve[];
  warning?: string;
}

export function buildCurves(rows: ResultRow[], spec: FigureSpec): RenderedCurve[] {
  return spec.curves.map((c) => ({ spec: c, points: aggregate(rows, c.filter) }));
}

export function render(csvPath: string, spec: FigureSpec, outDir: string): RenderResult {
  const rows = parseCsv(readFileSync(csvPath, "utf-8"));
  const curves = buildCurves(rows, spec);
  const total = curves.reduce((n, c) => n + c.points.length, 0);
  const warning = total === 0
    ? (rows.length === 0 ? "no data rows in CSV" : "no rows matched any curve filter")
    : undefined;
  if (warning) {
    console.warn(`warning: ${warning}`);
  }

  const list = buildDisplayList(spec, curves, warning);
  mkdirSync(outDir, { recursive: true });
  const svgPath = join(outDir, `${spec.outStem}.svg`);
  const pngPath = join(outDir, `${spec.outStem}.png`);
  writeFileSync(svgPath, toSvg(list), "utf-8");
  writeFileSync(pngPath, encodePng(rasterize(list)));
  return { svgPath, pngPath, curves, warning };
}
