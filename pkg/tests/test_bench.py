import json
import math
import os

import numpy as np
import pytest

from fsanm.bench import (
    CSV_HEADER,
    BenchAbort,
    ExperimentConfig,
    ResultRow,
    derive_seed,
    emit_results,
    load_config,
    parse_config_text,
    rows_to_csv,
    run_experiment,
    run_trial,
    summarize,
)
from fsanm.cli import main as cli_main

TINY = dict(mode="1d", n_t=16, n_r=1, s=16, l=1, snr_grid_db=(0.0,),
            prior_widths_deg=(60.0,), omp_grids=(1.0,), trials=2,
            base_seed=7, gain_vars=(1.0,), max_iter=3000, sensing="gaussian")


def strip_wall(csv_text: str) -> str:
    lines = csv_text.strip().split("\n")
    return "\n".join(",".join(line.split(",")[:-1]) for line in lines)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(mode="3d")
        with pytest.raises(ValueError):
            ExperimentConfig(trials=0)
        with pytest.raises(ValueError):
            ExperimentConfig(snr_grid_db=())
        with pytest.raises(ValueError):
            ExperimentConfig(prior_widths_deg=(400.0,))
        with pytest.raises(ValueError):
            ExperimentConfig(mode="2d", n_r=1)

    def test_min_sep_defaults(self):
        assert ExperimentConfig(mode="1d", n_t=128).min_sep_value == 1 / 128
        assert ExperimentConfig(mode="2d", n_t=16, n_r=8,
                                s=16).min_sep_value == 1 / 128

    def test_parse_round_trip(self):
        text = """
        # Fig 1(b) style run
        mode = 2d
        n_t = 16
        n_r = 8
        s = 16
        l = 2
        snr_grid_db = -10, 10
        prior_widths_deg = 30
        omp_grids = 0.5, 1.0
        trials = 3
        base_seed = 11
        mu_scale = 0.4
        run_plain = true
        """
        cfg = parse_config_text(text)
        assert cfg.mode == "2d"
        assert cfg.n_r == 8
        assert cfg.snr_grid_db == (-10.0, 10.0)
        assert cfg.omp_grids == (0.5, 1.0)
        assert cfg.mu_scale == 0.4
        assert cfg.run_plain is True

    def test_parse_rejects_unknown_key(self):
        with pytest.raises(ValueError):
            parse_config_text("bogus = 3")
        with pytest.raises(ValueError):
            parse_config_text("just a line")


class TestDeriveSeed:
    def test_deterministic_and_distinct(self):
        a = derive_seed(1, 2, 3)
        assert a == derive_seed(1, 2, 3)
        assert a != derive_seed(1, 2, 4)
        assert a != derive_seed(2, 2, 3)


class TestRunTrial:
    def test_rows_cover_all_methods_and_share_seed(self):
        cfg = ExperimentConfig(**TINY)
        rows = run_trial(cfg, 0)
        methods = {r.method for r in rows}
        assert methods == {"fs-anm-60", "anm", "omp-1"}
        assert len({r.seed for r in rows}) == 1
        assert all(r.trial == 0 for r in rows)

    def test_method_columns(self):
        cfg = ExperimentConfig(**TINY)
        rows = run_trial(cfg, 1)
        for r in rows:
            if r.method.startswith("fs"):
                assert r.prior_deg == 60.0 and r.grid_mult is None
            elif r.method.startswith("omp"):
                assert r.grid_mult == 1.0 and r.prior_deg is None
            else:
                assert r.prior_deg is None and r.grid_mult is None


class TestSummarize:
    def test_matches_independent_recomputation(self):
        rng = np.random.default_rng(0)
        rows = []
        for trial in range(50):
            for method in ("a", "b"):
                for snr in (0.0, 10.0):
                    rows.append(ResultRow(
                        method=method, mode="1d", n_t=8, n_r=1, s=8, l=1,
                        prior_deg=None, grid_mult=None, snr_db=snr,
                        trial=trial, seed=1, nmse_db=float(rng.uniform(-30, 0)),
                        iters=1, wall_ms=0.0))
        summary = summarize(rows)
        for method in ("a", "b"):
            for snr in (0.0, 10.0):
                vals = [10 ** (r.nmse_db / 10) for r in rows
                        if r.method == method and r.snr_db == snr]
                expect = 10 * math.log10(np.mean(vals))
                got = summary["mean_nmse_db"][method][f"{snr:g}"]
                assert abs(got - expect) < 1e-12

    def test_failures_excluded_and_counted(self):
        rows = [
            ResultRow("a", "1d", 8, 1, 8, 1, None, None, 0.0, 0, 1, -10.0, 5, 0.0),
            ResultRow("a", "1d", 8, 1, 8, 1, None, None, 0.0, 1, 2, None, 99, 0.0),
        ]
        s = summarize(rows)
        assert s["mean_nmse_db"]["a"]["0"] == pytest.approx(-10.0)
        assert s["failures"] == {"a": 1}
        assert s["failed_rows"] == 1


class TestEmit:
    def test_header_only_for_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_results([], path, fmt="csv")
        assert path.read_text(encoding="utf-8") == CSV_HEADER + "\n"

    def test_single_row_parseable(self, tmp_path):
        row = ResultRow("anm", "1d", 8, 1, 8, 1, None, None, 0.0, 0, 123,
                        -12.5, 40, 3.25)
        path = tmp_path / "one.csv"
        emit_results([row], path, fmt="csv")
        lines = path.read_text(encoding="utf-8").strip().split("\n")
        assert len(lines) == 2
        assert lines[0] == CSV_HEADER
        fields = lines[1].split(",")
        assert fields[0] == "anm"
        assert fields[6] == "" and fields[7] == ""   # prior_deg, grid_mult empty
        assert float(fields[11]) == -12.5

    def test_json_mirrors_rows_and_summary(self, tmp_path):
        row = ResultRow("anm", "1d", 8, 1, 8, 1, None, None, 0.0, 0, 123,
                        -12.5, 40, 3.25)
        path = tmp_path / "r.json"
        emit_results([row], path, fmt="json")
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert payload["rows"][0]["method"] == "anm"
        assert payload["rows"][0]["nmse_db"] == -12.5
        assert "anm" in payload["summary"]["mean_nmse_db"]

    def test_lf_line_endings(self, tmp_path):
        path = tmp_path / "lf.csv"
        emit_results([], path, fmt="csv")
        raw = path.read_bytes()
        assert b"\r" not in raw


class TestRunExperiment:
    def test_determinism_modulo_wall_time(self):
        cfg = ExperimentConfig(**TINY)
        rows1, summary1 = run_experiment(cfg)
        rows2, summary2 = run_experiment(cfg)
        assert strip_wall(rows_to_csv(rows1)) == strip_wall(rows_to_csv(rows2))
        assert summary1["mean_nmse_db"] == summary2["mean_nmse_db"]

    def test_rows_sorted(self):
        cfg = ExperimentConfig(**TINY)
        rows, _ = run_experiment(cfg)
        keys = [r.sort_key() for r in rows]
        assert keys == sorted(keys)

    def test_abort_on_failures(self):
        cfg = ExperimentConfig(**{**TINY, "max_iter": 2})
        with pytest.raises(BenchAbort):
            run_experiment(cfg)

    def test_parallel_jobs_match_serial(self):
        serial, _ = run_experiment(ExperimentConfig(**TINY))
        parallel, _ = run_experiment(ExperimentConfig(**{**TINY, "jobs": 2}))
        assert strip_wall(rows_to_csv(serial)) == strip_wall(rows_to_csv(parallel))


class TestCli:
    def test_run_and_outputs(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text("""
            mode = 1d
            n_t = 16
            s = 16
            l = 1
            snr_grid_db = 0
            prior_widths_deg = 60
            omp_grids = 1.0
            trials = 1
            base_seed = 3
            gain_vars = 1.0
            sensing = gaussian
        """, encoding="utf-8")
        out = tmp_path / "rows.csv"
        rc = cli_main(["run", str(cfg_path), "--out", str(out)])
        assert rc == 0
        text = out.read_text(encoding="utf-8")
        assert text.startswith(CSV_HEADER)
        assert len(text.strip().split("\n")) == 4  # header + 3 methods

    def test_run_abort_exit_code(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text("mode = 1d\nn_t = 8\ns = 8\nl = 1\n"
                            "snr_grid_db = 0\nprior_widths_deg = 60\n"
                            "omp_grids =\ntrials = 1\nmax_iter = 2\n"
                            "gain_vars = 1.0\nsensing = gaussian\n",
                            encoding="utf-8")
        rc = cli_main(["run", str(cfg_path), "--out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_norm_subcommand(self, tmp_path, capsys):
        from fsanm.signal_model import array_response
        h = 2.5 * array_response(12, 0.1).values
        vec_path = tmp_path / "h.npy"
        np.save(vec_path, h)
        rc = cli_main(["norm", str(vec_path), "--n-t", "12",
                       "--interval", "-0.1", "0.3"])
        assert rc == 0
        value = float(capsys.readouterr().out.strip())
        assert abs(value - 2.5) < 1e-3

    def test_norm_trace_output(self, tmp_path, capsys):
        from fsanm.signal_model import array_response
        h = array_response(10, 0.05).values
        vec_path = tmp_path / "h.npy"
        np.save(vec_path, h)
        trace_path = tmp_path / "trace.csv"
        rc = cli_main(["norm", str(vec_path), "--n-t", "10",
                       "--interval", "-0.2", "0.2",
                       "--trace-out", str(trace_path)])
        assert rc == 0
        capsys.readouterr()
        lines = trace_path.read_text(encoding="utf-8").strip().split("\n")
        assert lines[0] == "iter,primal_residual,dual_residual,objective"
        assert len(lines) > 2
        assert len(lines[1].split(",")) == 4

    def test_retrieve_subcommand(self, tmp_path, capsys):
        from fsanm.fs_toeplitz import ToeplitzSeq
        seq = ToeplitzSeq.from_atoms(10, [1.5], [0.2])
        seq_path = tmp_path / "seq.npy"
        np.save(seq_path, seq.t)
        rc = cli_main(["retrieve", str(seq_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "tx_freq=+0.2" in out
        assert "coeff=1.5" in out
