/** Figure specification: which curves to draw and how to label them. */

import { readFileSync } from "node:fs";
import type { RowFilter } from "./aggregate.js";

export interface CurveSpec {
  label: string;
  filter: RowFilter;
  color?: string;
  marker?: "circle" | "square" | "triangle" | "diamond" | "none";
  dash?: boolean;
}

export interface FigureSpec {
  title?: string;
  xLabel?: string;
  yLabel?: string;
  outStem: string;
  width?: number;
  height?: number;
  curves: CurveSpec[];
}

export class FigureSpecError extends Error {}

const DEFAULT_COLORS = [
  "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

export function validateFigureSpec(spec: unknown): FigureSpec {
  if (typeof spec !== "object" || spec === null) {
    throw new FigureSpecError("figure spec must be a JSON object");
  }
  const s = spec as Record<string, unknown>;
  if (typeof s.outStem !== "string" || s.outStem.length === 0) {
    throw new FigureSpecError("figure spec needs a non-empty outStem");
  }
  if (!Array.isArray(s.curves) || s.curves.length === 0) {
    throw new FigureSpecError("figure spec needs a non-empty curves array");
  }
  const labels = new Set<string>();
  const curves: CurveSpec[] = (s.curves as unknown[]).map((c, i) => {
    const cu = c as Record<string, unknown>;
    if (typeof cu.label !== "string") {
      throw new FigureSpecError(`curve ${i}: missing label`);
    }
    if (labels.has(cu.label)) {
      throw new FigureSpecError(`duplicate curve label: ${cu.label}`);
    }
    labels.add(cu.label);
    if (typeof cu.filter !== "object" || cu.filter === null) {
      throw new FigureSpecError(`curve ${cu.label}: missing filter`);
    }
    return {
      label: cu.label,
      filter: cu.filter as RowFilter,
      color: typeof cu.color === "string" ? cu.color : DEFAULT_COLORS[i % DEFAULT_COLORS.length],
      marker: (cu.marker as CurveSpec["marker"]) ?? "circle",
      dash: cu.dash === true,
    };
  });
  return {
    title: typeof s.title === "string" ? s.title : undefined,
    xLabel: typeof s.xLabel === "string" ? s.xLabel : "SNR [dB]",
    yLabel: typeof s.yLabel === "string" ? s.yLabel : "NMSE [dB]",
    outStem: s.outStem,
    width: typeof s.width === "number" ? s.width : 800,
    height: typeof s.height === "number" ? s.height : 560,
    curves,
  };
}

export function loadFigureSpec(path: string): FigureSpec {
  return validateFigureSpec(JSON.parse(readFileSync(path, "utf-8")));
}
