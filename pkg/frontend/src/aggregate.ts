/**
 * Mean-NMSE aggregation, mirroring the benchmark's summary rule exactly:
 * average in linear scale per (curve, SNR), report in dB, skip failure rows.
 */

import type { ResultRow } from "./schema.js";

export interface CurvePoint {
  snrDb: number;
  meanNmseDb: number;
  trials: number;
}

export type RowFilter = Partial<Record<keyof ResultRow, string | number>>;

export function matches(row: ResultRow, filter: RowFilter): boolean {
  for (const [key, want] of Object.entries(filter)) {
    const got = row[key as keyof ResultRow];
    if (typeof want === "number") {
      if (typeof got !== "number" || got !== want) return false;
    } else if (String(got) !== want) {
      return false;
    }
  }
  return true;
}

/** Per-SNR linear-mean NMSE for the rows selected by the filter. */
export function aggregate(rows: ResultRow[], filter: RowFilter): CurvePoint[] {
  const bySnr = new Map<number, number[]>();
  for (const row of rows) {
    if (!matches(row, filter) || row.nmse_db === null) continue;
    const list = bySnr.get(row.snr_db) ?? [];
    list.push(Math.pow(10, row.nmse_db / 10));
    bySnr.set(row.snr_db, list);
  }
  return [...bySnr.entries()]
    .map(([snrDb, vals]) => ({
      snrDb,
      meanNmseDb: 10 * Math.log10(vals.reduce((a, b) => a + b, 0) / vals.length),
      trials: vals.length,
    }))
    .sort((a, b) => a.snrDb - b.snrDb);
}
