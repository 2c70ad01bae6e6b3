#!/usr/bin/env python3
"""Produce the frontend's golden fixtures: a 16x8 sweep CSV plus the matching
summary JSON, written to frontend/test/fixtures/."""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from fsanm.bench import ExperimentConfig, emit_results, run_experiment, summarize

OUT = pathlib.Path(__file__).resolve().parents[1] / "frontend" / "test" / "fixtures"


def main():
    trials = int(sys.argv[1]) if len(sys.argv) > 1 else 40
    config = ExperimentConfig(
        mode="2d", n_t=16, n_r=8, s=16, l=2,
        snr_grid_db=(-10.0, -5.0, 0.0, 5.0, 10.0),
        prior_widths_deg=(180.0, 120.0, 60.0, 30.0),
        omp_grids=(0.5, 1.0), run_plain=True,
        trials=trials, base_seed=20240810, gain_vars=(1.0, 0.1),
        sensing="dft", mu_scale=0.4,
        eps_abs=1e-5, eps_rel=1e-3, max_iter=20000,
    )
    rows, summary = run_experiment(config)
    OUT.mkdir(parents=True, exist_ok=True)
    emit_results(rows, OUT / "golden.csv", fmt="csv")
    with open(OUT / "golden_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"wrote {OUT}/golden.csv ({len(rows)} rows)")
    for method, per_snr in summary["mean_nmse_db"].items():
        print(f"  {method}: " + "  ".join(f"{k}:{v:.2f}" for k, v in per_snr.items()))


if __name__ == "__main__":
    main()
