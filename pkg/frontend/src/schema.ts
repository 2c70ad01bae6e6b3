/**
 * Benchmark CSV schema: parsing and validation.
 *
 * The producer writes a fixed header; rows never contain quoted fields, so a
 * plain split is a faithful parser. nmse_db may be empty (a solver-failure
 * row) — such rows are kept but carry null and are excluded from aggregation.
 */

export const EXPECTED_COLUMNS = [
  "method", "mode", "n_t", "n_r", "S", "L", "prior_deg", "grid_mult",
  "snr_db", "trial", "seed", "nmse_db", "iters", "wall_ms",
] as const;

export type ColumnName = (typeof EXPECTED_COLUMNS)[number];

export interface ResultRow {
  method: string;
  mode: string;
  n_t: number;
  n_r: number;
  S: number;
  L: number;
  prior_deg: number | null;
  grid_mult: number | null;
  snr_db: number;
  trial: number;
  seed: string;
  nmse_db: number | null;
  iters: number;
  wall_ms: number;
}

export class SchemaError extends Error {}

function parseOptionalNumber(field: string, value: string, line: number): number | null {
  if (value === "") return null;
  const x = Number(value);
  if (!Number.isFinite(x)) {
    throw new SchemaError(`line ${line}: column ${field} is not numeric: ${value}`);
  }
  return x;
}

function parseNumber(field: string, value: string, line: number): number {
  const x = parseOptionalNumber(field, value, line);
  if (x === null) {
    throw new SchemaError(`line ${line}: column ${field} must not be empty`);
  }
  return x;
}

/** Parse benchmark CSV text; throws SchemaError naming any missing column. */
export function parseCsv(text: string): ResultRow[] {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty file: expected at least a header row");
  }
  const header = lines[0].split(",");
  for (const col of EXPECTED_COLUMNS) {
    if (!header.includes(col)) {
      throw new SchemaError(`missing column: ${col}`);
    }
  }
  const idx = new Map(header.map((name, i) => [name, i]));
  const at = (fields: string[], col: ColumnName) => fields[idx.get(col)!] ?? "";

  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split(",");
    if (fields.length !== header.length) {
      throw new SchemaError(
        `line ${i + 1}: expected ${header.length} fields, got ${fields.length}`,
      );
    }
    rows.push({
      method: at(fields, "method"),
      mode: at(fields, "mode"),
      n_t: parseNumber("n_t", at(fields, "n_t"), i + 1),
      n_r: parseNumber("n_r", at(fields, "n_r"), i + 1),
      S: parseNumber("S", at(fields, "S"), i + 1),
      L: parseNumber("L", at(fields, "L"), i + 1),
      prior_deg: parseOptionalNumber("prior_deg", at(fields, "prior_deg"), i + 1),
      grid_mult: parseOptionalNumber("grid_mult", at(fields, "grid_mult"), i + 1),
      snr_db: parseNumber("snr_db", at(fields, "snr_db"), i + 1),
      trial: parseNumber("trial", at(fields, "trial"), i + 1),
      seed: at(fields, "seed"),
      nmse_db: parseOptionalNumber("nmse_db", at(fields, "nmse_db"), i + 1),
      iters: parseNumber("iters", at(fields, "iters"), i + 1),
      wall_ms: parseNumber("wall_ms", at(fields, "wall_ms"), i + 1),
    });
  }
  return rows;
}
