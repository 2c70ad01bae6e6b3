"""Channel estimators: FS-ANM (1D/2D), plain ANM, on-grid OMP, and NMSE.

Bookkeeping conventions. All estimators report the physical channel matrix
H_hat of shape (n_r, n_t) plus its column-major vectorization h_hat (which,
for a multipath channel, decomposes over atoms conj(a(n_t, tx)) kron
a(n_r, rx)). The 1D solver-side unknown is the conjugated channel
sum_l conj(alpha_l) a(n_t, tx_l); the 2D solver-side unknown is vec(H) itself,
whose tx frequencies enter negated — hence the 2D band constraint is built on
the reflected tx interval and retrieved tx frequencies are negated back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fs_toeplitz as fst
from .signal_model import FrequencyInterval, MeasurementSet, steering_matrix
from .solver import SdpProblem, SdpSolution, SolverOptions, solve

NMSE_FLOOR_DB = -300.0


@dataclass(frozen=True, eq=False)
class EstimateResult:
    """Channel estimate plus diagnostics.

    h_hat is the column-major vectorization of H_hat (Kronecker order
    conj(a_tx) kron a_rx); nmse_db is present when ground truth was supplied.
    """

    H_hat: np.ndarray
    h_hat: np.ndarray
    nmse_db: float | None = None
    retrieved: fst.VandermondeDecomposition | None = None
    solver_diag: object = None


@dataclass(frozen=True, eq=False)
class OmpTrace:
    selected: np.ndarray
    correlations: np.ndarray
    residual_norms: np.ndarray
    used_pinv_fallback: bool


def nmse_db(H_hat: np.ndarray, H_true: np.ndarray) -> float:
    """10 log10( ||H_hat - H||_F^2 / ||H||_F^2 ), floored at -300 dB."""
    H_hat = np.asarray(H_hat)
    H_true = np.asarray(H_true)
    if H_hat.shape != H_true.shape:
        raise ValueError(f"shape mismatch: {H_hat.shape} vs {H_true.shape}")
    denom = np.linalg.norm(H_true) ** 2
    if denom == 0:
        raise ValueError("ground-truth channel has zero norm")
    err = np.linalg.norm(H_hat - H_true) ** 2
    if err == 0:
        return NMSE_FLOOR_DB
    return max(10.0 * math.log10(err / denom), NMSE_FLOOR_DB)


def default_mu(noise_var: float, n_t: int, n_r: int = 1) -> float:
    """mu = sigma_n sqrt(N log N) with N the channel dimension (natural log)."""
    n = n_t * n_r
    return math.sqrt(noise_var) * math.sqrt(n * math.log(n))


def _resolve_mu(mu, m: MeasurementSet, n_t: int, n_r: int) -> float:
    if mu is not None:
        return float(mu)
    if m.noise_var <= 0:
        raise ValueError("mu must be given explicitly for noiseless measurements")
    return default_mu(m.noise_var, n_t, n_r)


def _unvec(h: np.ndarray, n_t: int, n_r: int) -> np.ndarray:
    return np.reshape(h, (n_r, n_t), order="F")


def _result(H_hat: np.ndarray, H_true, retrieved, diag) -> EstimateResult:
    return EstimateResult(
        H_hat=H_hat,
        h_hat=H_hat.flatten(order="F"),
        nmse_db=None if H_true is None else nmse_db(H_hat, H_true),
        retrieved=retrieved,
        solver_diag=diag,
    )


def _measurement_1d(m: MeasurementSet):
    if m.n_rx != 1:
        raise ValueError(f"1D estimator requires a single rx antenna, got {m.n_rx}")
    y = m.Y[0, :].conj()                      # y_tilde = [y_1..y_S]^H
    phi = (m.F @ m.X).conj().T                # X^H F^H, maps the conjugated channel
    return y, phi


def _measurement_2d(m: MeasurementSet):
    y = m.Y.flatten(order="F")                # vec(Y)
    phi = np.kron((m.F @ m.X).T, np.eye(m.n_rx))
    return y, phi


def _retrieve_1d(sol: SdpSolution, tol: float, model_order=None):
    try:
        return fst.vandermonde_retrieve(sol.toeplitz_seq, tol=tol, psd_tol=1e-3,
                                        model_order=model_order)
    except fst.RetrievalError:
        return None


def _retrieve_2d(sol: SdpSolution, tol: float, model_order=None):
    try:
        dec = fst.vandermonde_retrieve(sol.toeplitz_seq, tol=tol, psd_tol=1e-3,
                                       model_order=model_order)
    except fst.RetrievalError:
        return None
    # solver-side tx frequencies are the negated physical ones
    idx = np.argsort(-dec.tx_freqs)
    return fst.VandermondeDecomposition(
        coefficients=dec.coefficients[idx], tx_freqs=-dec.tx_freqs[idx],
        rx_freqs=dec.rx_freqs[idx], residual_norm=dec.residual_norm,
    )


def estimate_fs_anm_1d(m: MeasurementSet, interval: FrequencyInterval, mu=None,
                       opts: SolverOptions | None = None, retrieve: bool = False,
                       model_order=None, H_true=None,
                       _mode: str = "fs") -> EstimateResult:
    """Band-constrained atomic-norm channel estimate for a 1-rx-antenna system."""
    y, phi = _measurement_1d(m)
    n_t = m.n_tx
    beta1 = fst.beta_coeffs(interval) if _mode == "fs" else None
    problem = SdpProblem(y=y, phi=phi, mu=_resolve_mu(mu, m, n_t, 1), n_t=n_t,
                         beta1=beta1, constraint_mode=_mode)
    sol = solve(problem, opts)
    H_hat = sol.h_hat.conj().reshape(1, n_t)  # solver estimates the conjugated row
    retrieved = _retrieve_1d(sol, tol=1e-2, model_order=model_order) if retrieve else None
    return _result(H_hat, H_true, retrieved, sol)


def estimate_fs_anm_2d(m: MeasurementSet, tx_interval: FrequencyInterval,
                       rx_interval: FrequencyInterval, mu=None,
                       opts: SolverOptions | None = None, retrieve: bool = False,
                       model_order=None, H_true=None,
                       _mode: str = "fs") -> EstimateResult:
    """Band-constrained atomic-norm channel estimate for a multi-antenna rx."""
    if m.n_rx < 2:
        raise ValueError("2D estimator requires n_r > 1")
    y, phi = _measurement_2d(m)
    n_t, n_r = m.n_tx, m.n_rx
    if _mode == "fs":
        beta1 = fst.beta_coeffs(tx_interval.reflected())
        beta2 = fst.beta_coeffs(rx_interval)
    else:
        beta1 = beta2 = None
    problem = SdpProblem(y=y, phi=phi, mu=_resolve_mu(mu, m, n_t, n_r), n_t=n_t,
                         n_r=n_r, beta1=beta1, beta2=beta2, constraint_mode=_mode)
    sol = solve(problem, opts)
    H_hat = _unvec(sol.h_hat, n_t, n_r)
    retrieved = _retrieve_2d(sol, tol=1e-2, model_order=model_order) if retrieve else None
    return _result(H_hat, H_true, retrieved, sol)


def estimate_anm_plain(m: MeasurementSet, mode: str = "1d", mu=None,
                       opts: SolverOptions | None = None,
                       H_true=None) -> EstimateResult:
    """Unconstrained atomic-norm baseline: the same SDPs without band constraints."""
    if mode == "1d":
        return estimate_fs_anm_1d(m, interval=None, mu=mu, opts=opts,
                                  H_true=H_true, _mode="plain")
    if mode == "2d":
        return estimate_fs_anm_2d(m, tx_interval=None, rx_interval=None, mu=mu,
                                  opts=opts, H_true=H_true, _mode="plain")
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# OMP baseline
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridDictionary:
    """On-grid steering dictionary for OMP, columns normalized to unit norm.

    1D atoms are a(n_t, f_g)/sqrt(n_t); 2D atoms conj(a_tx) kron a_rx over the
    joint (tx grid) x (rx grid), matching the vec(H) parametrization.
    """

    grid_tx: np.ndarray
    grid_rx: np.ndarray | None
    atoms: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n_t: int, grid_size_tx: int, n_r: int = 1,
              grid_size_rx: int | None = None) -> "GridDictionary":
        if grid_size_tx < 1:
            raise ValueError("grid must contain at least one point")
        grid_tx = -0.5 + np.arange(grid_size_tx) / grid_size_tx
        A_tx = steering_matrix(n_t, grid_tx)
        if n_r == 1:
            return cls(grid_tx=grid_tx, grid_rx=None, atoms=A_tx / math.sqrt(n_t))
        if grid_size_rx is None:
            grid_size_rx = max(1, round(grid_size_tx * n_r / n_t))
        grid_rx = -0.5 + np.arange(grid_size_rx) / grid_size_rx
        A_rx = steering_matrix(n_r, grid_rx)
        atoms = np.einsum("tg,rh->trgh", A_tx.conj(), A_rx)
        atoms = atoms.reshape(n_t * n_r, grid_size_tx * grid_size_rx)
        return cls(grid_tx=grid_tx, grid_rx=grid_rx,
                   atoms=atoms / math.sqrt(n_t * n_r))

    @property
    def size(self) -> int:
        return self.atoms.shape[1]


def estimate_omp(m: MeasurementSet, dictionary: GridDictionary, sparsity: int,
                 H_true=None) -> EstimateResult:
    """Orthogonal matching pursuit over the gridded dictionary.

    Runs `sparsity` greedy correlation steps against the effective sensing
    matrix phi @ atoms, then least-squares refits on the selected support.
    """
    n_t, n_r = m.n_tx, m.n_rx
    if n_r == 1:
        y, phi = _measurement_1d(m)
    else:
        y, phi = _measurement_2d(m)
    psi = phi @ dictionary.atoms
    col_norms = np.linalg.norm(psi, axis=0)
    col_norms[col_norms == 0] = np.inf

    selected: list[int] = []
    corr_log = []
    res_log = []
    used_pinv = False
    residual = y.copy()
    coef = np.zeros(0, dtype=complex)
    for _ in range(sparsity):
        scores = np.abs(psi.conj().T @ residual) / col_norms
        scores[selected] = -1.0
        best = int(np.argmax(scores))
        selected.append(best)
        corr_log.append(float(scores[best]))
        sub = psi[:, selected]
        # rank-truncated LS: near-duplicate picks must not blow up through the
        # sensing null space
        coef, _, rank, _ = np.linalg.lstsq(sub, y, rcond=1e-6)
        if rank < len(selected):
            used_pinv = True
        residual = y - sub @ coef
        res_log.append(float(np.linalg.norm(residual)))

    h_solver = dictionary.atoms[:, selected] @ coef
    if n_r == 1:
        H_hat = h_solver.conj().reshape(1, n_t)
    else:
        H_hat = _unvec(h_solver, n_t, n_r)
    trace = OmpTrace(selected=np.array(selected), correlations=np.array(corr_log),
                     residual_norms=np.array(res_log), used_pinv_fallback=used_pinv)
    return _result(H_hat, H_true, None, trace)
