/**
 * Usage: node --experimental-strip-types src/cli.ts <results.csv> <figure.json> <out-dir>
 *
 * Reads a benchmark CSV and a figure spec, writes <outStem>.svg and
 * <outStem>.png into the output directory.
 */

import { loadFigureSpec } from "./figure.js";
import { render } from "./render.js";

function main(argv: string[]): number {
  if (argv.length !== 3) {
    console.error("usage: cli.ts <results.csv> <figure.json> <out-dir>");
    return 2;
  }
  const [csvPath, specPath, outDir] = argv;
  try {
    const spec = loadFigureSpec(specPath);
    const result = render(csvPath, spec, outDir);
    console.log(`wrote ${result.svgPath}`);
    console.log(`wrote ${result.pngPath}`);
    for (const curve of result.curves) {
      const pts = curve.points
        .map((p) => `${p.snrDb}dB:${p.meanNmseDb.toFixed(2)}`)
        .join("  ");
      console.log(`${curve.spec.label}: ${pts || "(no points)"}`);
    }
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
