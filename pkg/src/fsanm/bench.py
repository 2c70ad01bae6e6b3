"""Monte Carlo benchmark harness: SNR sweeps over matched channel realizations
for FS-ANM (one curve per prior width), plain ANM, and gridded OMP.

Every method within a trial consumes the same measurement realization; trial
seeds are derived deterministically from the base seed so results are
reproducible regardless of scheduling. Mean NMSE is aggregated in linear
scale and reported in dB.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .estimators import (
    GridDictionary,
    default_mu,
    estimate_anm_plain,
    estimate_fs_anm_1d,
    estimate_fs_anm_2d,
    estimate_omp,
)
from .signal_model import (
    dft_sensing_matrix,
    gaussian_sensing_matrix,
    generate_prior_scenario,
    simulate_measurements,
)
from .solver import SolverOptions

CSV_HEADER = "method,mode,n_t,n_r,S,L,prior_deg,grid_mult,snr_db,trial,seed,nmse_db,iters,wall_ms"

MAX_FAILURE_RATE = 0.20


class BenchAbort(RuntimeError):
    """Raised when the solver failure rate exceeds the abort threshold."""


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "1d"
    n_t: int = 128
    n_r: int = 1
    s: int = 50
    l: int = 2
    snr_grid_db: tuple = (-10.0, -5.0, 0.0, 5.0, 10.0)
    prior_widths_deg: tuple = (60.0,)
    omp_grids: tuple = (0.5, 0.75, 1.0)
    run_plain: bool = True
    trials: int = 100
    base_seed: int = 1
    gain_vars: tuple = (1.0, 0.1)
    min_sep: float | None = None
    center_mode: str = "strongest"
    sensing: str = "dft"
    mu_scale: float = 1.0
    rho: float = 1.0
    eps_abs: float = 1e-5
    eps_rel: float = 1e-3
    max_iter: int = 20_000
    jobs: int = 1

    def __post_init__(self):
        if self.mode not in ("1d", "2d"):
            raise ValueError(f"mode must be 1d or 2d, got {self.mode!r}")
        if self.mode == "1d" and self.n_r != 1:
            raise ValueError("1d mode requires n_r = 1")
        if self.mode == "2d" and self.n_r < 2:
            raise ValueError("2d mode requires n_r > 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.snr_grid_db) == 0:
            raise ValueError("snr_grid_db must be nonempty")
        for w in self.prior_widths_deg:
            if not 0.0 < w <= 360.0:
                raise ValueError(f"prior width {w} outside (0, 360] degrees")
        if self.sensing not in ("dft", "gaussian"):
            raise ValueError(f"unknown sensing {self.sensing!r}")
        object.__setattr__(self, "snr_grid_db", tuple(float(v) for v in self.snr_grid_db))
        object.__setattr__(self, "prior_widths_deg",
                           tuple(float(v) for v in self.prior_widths_deg))
        object.__setattr__(self, "omp_grids", tuple(float(v) for v in self.omp_grids))
        object.__setattr__(self, "gain_vars", tuple(float(v) for v in self.gain_vars))

    @property
    def min_sep_value(self) -> float:
        if self.min_sep is not None:
            return self.min_sep
        return 1.0 / self.n_t if self.mode == "1d" else 1.0 / (self.n_t * self.n_r)

    def solver_options(self) -> SolverOptions:
        return SolverOptions(rho=self.rho, eps_abs=self.eps_abs,
                             eps_rel=self.eps_rel, max_iter=self.max_iter)


@dataclass(frozen=True)
class ResultRow:
    method: str
    mode: str
    n_t: int
    n_r: int
    s: int
    l: int
    prior_deg: float | None
    grid_mult: float | None
    snr_db: float
    trial: int
    seed: int
    nmse_db: float | None    # None marks a solver failure (excluded from means)
    iters: int
    wall_ms: float

    def sort_key(self):
        return (self.method, self.snr_db, self.trial)


def derive_seed(base_seed: int, *parts: int) -> int:
    """Stable per-(trial, stream) integer seed."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=tuple(parts))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _row_fields(row: ResultRow) -> list:
    return [row.method, row.mode, row.n_t, row.n_r, row.s, row.l, row.prior_deg,
            row.grid_mult, row.snr_db, row.trial, row.seed, row.nmse_db,
            row.iters, row.wall_ms]


def _method_tag(kind: str, value: float | None = None) -> str:
    if kind == "fs":
        return f"fs-anm-{value:g}"
    if kind == "omp":
        return f"omp-{value:g}"
    return "anm"


def run_trial(config: ExperimentConfig, trial: int) -> list[ResultRow]:
    """All configured methods on one channel realization, across the SNR grid."""
    scenario_seed = derive_seed(config.base_seed, trial, 0)
    sensing_seed = derive_seed(config.base_seed, trial, 1)
    draw_width = math.radians(min(config.prior_widths_deg)) \
        if config.prior_widths_deg else 2.0 * math.pi
    sep = config.min_sep_value
    scenario = generate_prior_scenario(
        config.n_t, config.n_r, config.gain_vars, draw_width,
        min_sep_tx=sep, min_sep_rx=sep if config.mode == "2d" else 0.0,
        rng_seed=scenario_seed, center_mode=config.center_mode,
    )
    make_f = dft_sensing_matrix if config.sensing == "dft" else gaussian_sensing_matrix
    F = make_f(config.n_t, config.s, rng_seed=sensing_seed)
    X = np.eye(config.s, dtype=complex)
    opts = config.solver_options()
    signal_energy = float(np.linalg.norm(scenario.H @ F @ X) ** 2)

    dictionaries = {
        g: GridDictionary.build(config.n_t, max(1, round(g * config.n_t)),
                                n_r=config.n_r)
        for g in config.omp_grids
    }

    rows: list[ResultRow] = []
    for snr_idx, snr_db in enumerate(config.snr_grid_db):
        noise_seed = derive_seed(config.base_seed, trial, 2 + snr_idx)
        sigma2 = signal_energy / (config.n_r * config.s * 10 ** (snr_db / 10))
        m = simulate_measurements(scenario.H, F, X, sigma2, rng_seed=noise_seed)
        mu = config.mu_scale * default_mu(sigma2, config.n_t, config.n_r)

        def push(kind, value, estimate):
            t0 = time.perf_counter()
            result = estimate()
            wall_ms = (time.perf_counter() - t0) * 1e3
            diag = result.solver_diag
            if hasattr(diag, "converged"):
                iters = diag.iterations
                nmse = result.nmse_db if diag.converged else None
            else:
                iters = config.l
                nmse = result.nmse_db
            rows.append(ResultRow(
                method=_method_tag(kind, value), mode=config.mode,
                n_t=config.n_t, n_r=config.n_r, s=config.s, l=config.l,
                prior_deg=value if kind == "fs" else None,
                grid_mult=value if kind == "omp" else None,
                snr_db=snr_db, trial=trial, seed=scenario_seed,
                nmse_db=nmse, iters=iters, wall_ms=wall_ms,
            ))

        for width in config.prior_widths_deg:
            w_rad = math.radians(width)
            if config.mode == "1d":
                push("fs", width, lambda w=w_rad: estimate_fs_anm_1d(
                    m, scenario.tx_interval(w), mu=mu, opts=opts, H_true=scenario.H))
            else:
                push("fs", width, lambda w=w_rad: estimate_fs_anm_2d(
                    m, scenario.tx_interval(w), scenario.rx_interval(w),
                    mu=mu, opts=opts, H_true=scenario.H))
        if config.run_plain:
            push("plain", None, lambda: estimate_anm_plain(
                m, config.mode, mu=mu, opts=opts, H_true=scenario.H))
        for g in config.omp_grids:
            push("omp", g, lambda d=dictionaries[g]: estimate_omp(
                m, d, config.l, H_true=scenario.H))
    return rows


def _run_trial_star(args):
    return run_trial(*args)


def summarize(rows: list[ResultRow]) -> dict:
    """Per-method per-SNR mean of linear-scale NMSE, reported in dB."""
    acc: dict = {}
    failures: dict = {}
    for row in rows:
        key = (row.method, row.snr_db)
        if row.nmse_db is None:
            failures[row.method] = failures.get(row.method, 0) + 1
            continue
        acc.setdefault(key, []).append(10 ** (row.nmse_db / 10))
    mean_nmse = {}
    for (method, snr), vals in sorted(acc.items()):
        mean_nmse.setdefault(method, {})[f"{snr:g}"] = float(
            10 * math.log10(sum(vals) / len(vals)))
    return {
        "mean_nmse_db": mean_nmse,
        "failures": failures,
        "total_rows": len(rows),
        "failed_rows": sum(failures.values()),
    }


def run_experiment(config: ExperimentConfig):
    """Run all trials; returns (rows sorted by (method, snr, trial), summary).

    Raises BenchAbort when more than MAX_FAILURE_RATE of the solver rows fail
    to converge.
    """
    if config.jobs > 1:
        import multiprocessing as mp
        with mp.Pool(config.jobs) as pool:
            chunks = pool.map(_run_trial_star,
                              [(config, t) for t in range(config.trials)])
    else:
        chunks = [run_trial(config, t) for t in range(config.trials)]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=ResultRow.sort_key)
    summary = summarize(rows)
    solver_rows = [r for r in rows if not r.method.startswith("omp")]
    if solver_rows:
        rate = sum(1 for r in solver_rows if r.nmse_db is None) / len(solver_rows)
        if rate > MAX_FAILURE_RATE:
            raise BenchAbort(
                f"solver failure rate {rate:.1%} exceeds {MAX_FAILURE_RATE:.0%}")
    return rows, summary


def rows_to_csv(rows: list[ResultRow]) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in _row_fields(row)))
    return "\n".join(lines) + "\n"


def emit_results(rows: list[ResultRow], path, fmt: str = "csv",
                 summary: dict | None = None) -> None:
    """Write rows (and summary, for JSON) to path. CSV is UTF-8 with LF endings."""
    if fmt == "csv":
        data = rows_to_csv(rows)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
    elif fmt == "json":
        header = CSV_HEADER.split(",")
        payload = {
            "rows": [dict(zip(header, _row_fields(r))) for r in rows],
            "summary": summary if summary is not None else summarize(rows),
        }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# config file parsing (flat key = value lines)
# ---------------------------------------------------------------------------

_LIST_FIELDS = {"snr_grid_db", "prior_widths_deg", "omp_grids", "gain_vars"}
_INT_FIELDS = {"n_t", "n_r", "s", "l", "trials", "base_seed", "max_iter", "jobs"}
_FLOAT_FIELDS = {"min_sep", "mu_scale", "rho", "eps_abs", "eps_rel"}
_BOOL_FIELDS = {"run_plain"}


def parse_config_text(text: str) -> ExperimentConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        val = val.strip()
        if key in _LIST_FIELDS:
            parsed = tuple(float(v) for v in val.replace("[", "").replace("]", "").split(",") if v.strip())
        elif key in _INT_FIELDS:
            parsed = int(val)
        elif key in _FLOAT_FIELDS:
            parsed = float(val)
        elif key in _BOOL_FIELDS:
            parsed = val.lower() in ("1", "true", "yes", "on")
        elif key in ("mode", "center_mode", "sensing"):
            parsed = val.lower()
        else:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        values[key] = parsed
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
