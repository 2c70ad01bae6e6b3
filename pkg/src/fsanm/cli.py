"""Command-line interface: Monte Carlo runs, atomic-norm evaluation, and
frequency retrieval diagnostics."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import fs_toeplitz as fst
from .bench import BenchAbort, emit_results, load_config, run_experiment
from .signal_model import FrequencyInterval
from .solver import SolverOptions, atomic_norm


def _load_complex_vector(path) -> np.ndarray:
    if str(path).endswith(".npy"):
        return np.asarray(np.load(path), dtype=complex)
    return np.loadtxt(path, dtype=complex, converters=complex)


def _cmd_run(args) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if overrides:
        config = replace(config, **overrides)
    try:
        rows, summary = run_experiment(config)
    except BenchAbort as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 2
    emit_results(rows, args.out, fmt=args.format, summary=summary)
    print(f"wrote {len(rows)} rows to {args.out}")
    for method, per_snr in summary["mean_nmse_db"].items():
        curve = "  ".join(f"{snr}dB:{v:7.2f}" for snr, v in per_snr.items())
        print(f"{method:>12s}  {curve}")
    if summary["failed_rows"]:
        print(f"failures: {summary['failures']}")
    return 0


def _cmd_norm(args) -> int:
    h = _load_complex_vector(args.vector)
    tx = FrequencyInterval(*args.interval) if args.interval else None
    rx = FrequencyInterval(*args.interval2) if args.interval2 else None
    opts = SolverOptions(eps_abs=args.eps_abs, eps_rel=args.eps_rel,
                         max_iter=args.max_iter, trace=args.trace_out is not None)
    mode = "plain" if args.plain else "fs"
    value, res = atomic_norm(h, args.n_t, args.n_r, tx_interval=tx, rx_interval=rx,
                             mode=mode, opts=opts, details=True)
    print(f"{value:.12g}")
    if args.trace_out is not None and res is not None:
        with open(args.trace_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("iter,primal_residual,dual_residual,objective\n")
            for i, (pr, du, obj) in enumerate(res["trace"], 1):
                fh.write(f"{i},{pr:.10g},{du:.10g},{obj:.10g}\n")
    return 0


def _cmd_retrieve(args) -> int:
    arr = np.load(args.sequence)
    if arr.ndim == 1:
        n = (len(arr) + 1) // 2
        seq = fst.ToeplitzSeq(n, arr)
    elif arr.ndim == 2:
        n_t = (arr.shape[0] + 1) // 2
        n_r = (arr.shape[1] + 1) // 2
        seq = fst.TwoLevelToeplitzSeq(n_t, n_r, arr)
    else:
        print("sequence file must hold a 1D or 2D complex array", file=sys.stderr)
        return 2
    try:
        dec = fst.vandermonde_retrieve(seq, model_order=args.model_order,
                                       tol=args.tol)
    except fst.RetrievalError as exc:
        print(f"retrieval failed: {exc}", file=sys.stderr)
        return 1
    print(f"# order={dec.order} residual={dec.residual_norm:.3e}")
    for i in range(dec.order):
        rx = "" if dec.rx_freqs is None else f" rx_freq={dec.rx_freqs[i]:+.9f}"
        print(f"atom {i}: coeff={dec.coefficients[i]:.9g} "
              f"tx_freq={dec.tx_freqs[i]:+.9f}{rx}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fsanm",
                                description="FS-ANM channel estimation benchmark")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo experiment from a config file")
    run.add_argument("config", help="flat key=value config file")
    run.add_argument("--out", default="results.csv")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--jobs", type=int, default=None)
    run.set_defaults(func=_cmd_run)

    norm = sub.add_parser("norm", help="atomic norm of a vector from file (.npy or text)")
    norm.add_argument("vector")
    norm.add_argument("--n-t", type=int, required=True)
    norm.add_argument("--n-r", type=int, default=1)
    norm.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"))
    norm.add_argument("--interval2", type=float, nargs=2, metavar=("LO", "HI"))
    norm.add_argument("--plain", action="store_true")
    norm.add_argument("--eps-abs", type=float, default=1e-8)
    norm.add_argument("--eps-rel", type=float, default=1e-6)
    norm.add_argument("--max-iter", type=int, default=50_000)
    norm.add_argument("--trace-out", default=None,
                      help="write per-iteration residual CSV here")
    norm.set_defaults(func=_cmd_norm)

    ret = sub.add_parser("retrieve", help="frequency retrieval from a saved sequence (.npy)")
    ret.add_argument("sequence")
    ret.add_argument("--model-order", type=int, default=None)
    ret.add_argument("--tol", type=float, default=1e-6)
    ret.set_defaults(func=_cmd_retrieve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
