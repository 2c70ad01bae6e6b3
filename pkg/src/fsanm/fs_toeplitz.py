"""Band-selective trigonometric polynomial, (2-level) Toeplitz constructors,
the frequency-selective constraint matrices they induce, and Vandermonde
frequency retrieval.

Conventions. A Toeplitz matrix of size n is generated by a sequence t indexed
by offsets -(n-1)..(n-1) stored as an array of length 2n-1 (center n-1):
T[i, j] = t[i-j]. A 2-level Toeplitz matrix is generated by an array V of
shape (2*n_t-1, 2*n_r-1) indexed by (tx offset, rx offset) and assembled with
tx-major blocks: T[m*n_r+p, n*n_r+q] = V[m-n, p-q]. With this ordering a
single spectral atom gives T = c * b b^H with b = a(n_t, f_tx) kron a(n_r, f_rx).

Retrieval enforces the rank bound r < min(n_t, n_r) for the 2-level case (the
uniqueness condition); the weaker bound r <= min(n_t*(n_r-1), (n_t-1)*n_r)
under which the factor matrices still have full column rank is deliberately
not relied on.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .signal_model import FrequencyInterval, steering_matrix

PSD_EPS = 1e-8


class RetrievalError(RuntimeError):
    """Frequency retrieval failed: inconsistent model order or large residual."""


# ---------------------------------------------------------------------------
# beta polynomial
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BetaCoeffs:
    """Coefficients of the degree-1 trigonometric polynomial
    beta(f) = r_plus1 * z^-1 + r_0 + r_minus1 * z with z = exp(i 2 pi f),
    positive exactly on the open band of `interval` and zero at its endpoints.
    """

    r_plus1: complex
    r_0: float
    interval: FrequencyInterval

    @property
    def r_minus1(self) -> complex:
        return np.conj(self.r_plus1)

    def window(self) -> np.ndarray:
        """Coefficients ordered by offset: [r_minus1, r_0, r_plus1]."""
        return np.array([self.r_minus1, self.r_0, self.r_plus1])

    def evaluate(self, f) -> np.ndarray:
        """beta(f), real-valued; vectorized over f."""
        f = np.asarray(f, dtype=float)
        val = self.r_0 + 2.0 * np.real(self.r_plus1 * np.exp(-2j * np.pi * f))
        return val if val.ndim else float(val)


def beta_coeffs(interval: FrequencyInterval) -> BetaCoeffs:
    """Band polynomial coefficients for an open frequency band.

    r_plus1 = exp(i pi (f_lo + f_hi)), r_0 = -2 cos(pi (f_hi - f_lo)); the
    interval type guarantees f_hi > f_lo so the sign factor is +1.
    """
    r1 = np.exp(1j * np.pi * (interval.f_lo + interval.f_hi))
    r0 = -2.0 * np.cos(np.pi * (interval.f_hi - interval.f_lo))
    return BetaCoeffs(r_plus1=complex(r1), r_0=float(r0), interval=interval)


# ---------------------------------------------------------------------------
# Toeplitz sequences and constraint matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ToeplitzSeq:
    """Generating sequence of an n x n Toeplitz matrix, offsets -(n-1)..(n-1)."""

    n: int
    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=complex)
        if t.shape != (2 * self.n - 1,):
            raise ValueError(f"sequence must have length {2 * self.n - 1}, got {t.shape}")
        object.__setattr__(self, "t", t)

    @classmethod
    def from_atoms(cls, n: int, coeffs, freqs) -> "ToeplitzSeq":
        """t_k = sum_l c_l exp(i 2 pi k f_l)."""
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        k = np.arange(-(n - 1), n)
        ex = np.exp(2j * np.pi * np.outer(k, np.atleast_1d(freqs)))
        return cls(n=n, t=ex @ coeffs)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        scale = max(1.0, float(np.abs(self.t).max(initial=0.0)))
        return bool(np.abs(self.t[::-1].conj() - self.t).max() <= tol * scale)


def toeplitz(seq: ToeplitzSeq) -> np.ndarray:
    """Assemble T[i, j] = t[i - j]."""
    n = seq.n
    return scipy.linalg.toeplitz(seq.t[n - 1:], seq.t[n - 1::-1])


def t_beta_1d(seq: ToeplitzSeq, coeffs: BetaCoeffs) -> np.ndarray:
    """Band-constraint matrix of size (n-1): [T_beta]_{ij} = sum_j r_j t_{i-j-offset}.

    Equals Toep(u) with u_d = sum_{j=-1..1} r_j t_{d-j}; for a sequence built
    from atoms at frequencies f_l this is sum_l c_l beta(f_l) a(n-1, f_l) a^H.
    """
    if seq.n < 2:
        raise ValueError("band-constraint matrix needs n >= 2")
    u = np.convolve(seq.t, coeffs.window())[2:-2]
    return toeplitz(ToeplitzSeq(n=seq.n - 1, t=u))


@dataclass(frozen=True, eq=False)
class TwoLevelToeplitzSeq:
    """Generating array of a 2-level Toeplitz matrix.

    V has shape (2*n_t - 1, 2*n_r - 1); column j holds the within-block
    sequence at rx offset j - (n_r - 1).
    """

    n_t: int
    n_r: int
    V: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.V, dtype=complex)
        if V.shape != (2 * self.n_t - 1, 2 * self.n_r - 1):
            raise ValueError(
                f"V must have shape {(2 * self.n_t - 1, 2 * self.n_r - 1)}, got {V.shape}"
            )
        object.__setattr__(self, "V", V)

    @classmethod
    def from_atoms(cls, n_t: int, n_r: int, coeffs, tx_freqs, rx_freqs):
        """V[k, j] = sum_l c_l exp(i 2 pi (k f_tx,l + j f_rx,l))."""
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        kt = np.arange(-(n_t - 1), n_t)
        kr = np.arange(-(n_r - 1), n_r)
        et = np.exp(2j * np.pi * np.outer(kt, np.atleast_1d(tx_freqs)))
        er = np.exp(2j * np.pi * np.outer(kr, np.atleast_1d(rx_freqs)))
        return cls(n_t=n_t, n_r=n_r, V=(et * coeffs) @ er.T)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        scale = max(1.0, float(np.abs(self.V).max(initial=0.0)))
        return bool(np.abs(self.V[::-1, ::-1].conj() - self.V).max() <= tol * scale)


def _block_assemble(V: np.ndarray, n_t: int, n_r: int) -> np.ndarray:
    """T4[m, p, n, q] = V[m - n + ct, p - q + cr], flattened to tx-major blocks."""
    kt = np.arange(n_t)
    kr = np.arange(n_r)
    ct = (V.shape[0] - 1) // 2
    cr = (V.shape[1] - 1) // 2
    K = kt[:, None] - kt[None, :] + ct
    J = kr[:, None] - kr[None, :] + cr
    T4 = V[K[:, None, :, None], J[None, :, None, :]]
    n = n_t * n_r
    return T4.reshape(n, n)


def two_level_toeplitz(seq: TwoLevelToeplitzSeq) -> np.ndarray:
    """Assemble the (n_t n_r) x (n_t n_r) 2-level Toeplitz matrix from V."""
    return _block_assemble(seq.V, seq.n_t, seq.n_r)


def t_beta1_2d(seq: TwoLevelToeplitzSeq, coeffs1: BetaCoeffs) -> np.ndarray:
    """Tx-band constraint matrix, size (n_t-1)*n_r: beta window convolved along tx offsets."""
    if seq.n_t < 2:
        raise ValueError("tx band-constraint matrix needs n_t >= 2")
    U = np.apply_along_axis(lambda col: np.convolve(col, coeffs1.window())[2:-2], 0, seq.V)
    return _block_assemble(U, seq.n_t - 1, seq.n_r)


def t_beta2_2d(seq: TwoLevelToeplitzSeq, coeffs2: BetaCoeffs) -> np.ndarray:
    """Rx-band constraint matrix, size n_t*(n_r-1): beta window convolved along rx offsets."""
    if seq.n_r < 2:
        raise ValueError("rx band-constraint matrix needs n_r >= 2")
    U = np.apply_along_axis(lambda row: np.convolve(row, coeffs2.window())[2:-2], 1, seq.V)
    return _block_assemble(U, seq.n_t, seq.n_r - 1)


# ---------------------------------------------------------------------------
# diagonal sums (adjoints of the assembly operators) and PSD helpers
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=32)
def _diag_index_1d(n: int) -> np.ndarray:
    i = np.arange(n)
    return (i[:, None] - i[None, :] + n - 1).ravel()


def toeplitz_diag_sums(G: np.ndarray) -> np.ndarray:
    """Per-offset sums s_k = sum_{i-j=k} G[i, j]; the adjoint of seq -> Toeplitz."""
    n = G.shape[0]
    idx = _diag_index_1d(n)
    flat = G.ravel()
    return (np.bincount(idx, weights=flat.real, minlength=2 * n - 1)
            + 1j * np.bincount(idx, weights=flat.imag, minlength=2 * n - 1))


def toeplitz_diag_counts(n: int) -> np.ndarray:
    return n - np.abs(np.arange(-(n - 1), n))


@functools.lru_cache(maxsize=32)
def _diag_index_2d(n_t: int, n_r: int) -> np.ndarray:
    mt = np.arange(n_t)
    mr = np.arange(n_r)
    kt = mt[:, None] - mt[None, :] + n_t - 1        # (n_t, n_t)
    kr = mr[:, None] - mr[None, :] + n_r - 1        # (n_r, n_r)
    # entry (m, p, n, q) -> flat offset index (m-n, p-q)
    idx = kt[:, None, :, None] * (2 * n_r - 1) + kr[None, :, None, :]
    return idx.ravel()


def two_level_diag_sums(G: np.ndarray, n_t: int, n_r: int) -> np.ndarray:
    """Per-(tx offset, rx offset) sums of a tx-major 2-level matrix; adjoint of V -> T(V)."""
    idx = _diag_index_2d(n_t, n_r)
    flat = G.ravel()
    size = (2 * n_t - 1) * (2 * n_r - 1)
    sums = (np.bincount(idx, weights=flat.real, minlength=size)
            + 1j * np.bincount(idx, weights=flat.imag, minlength=size))
    return sums.reshape(2 * n_t - 1, 2 * n_r - 1)


def two_level_diag_counts(n_t: int, n_r: int) -> np.ndarray:
    return np.outer(toeplitz_diag_counts(n_t), toeplitz_diag_counts(n_r))


def min_eigenvalue(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])


def is_psd(M: np.ndarray, eps: float = PSD_EPS) -> bool:
    """Scale-invariant PSD acceptance: min eig >= -eps * max(1, lambda_max)."""
    w = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    return bool(w[0] >= -eps * max(1.0, w[-1]))


def psd_project(M: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) PSD matrix: clip negative eigenvalues of the Hermitian part."""
    w, Q = np.linalg.eigh(0.5 * (M + M.conj().T))
    pos = w > 0
    if pos.all():
        return M
    Qp = Q[:, pos]
    return (Qp * w[pos]) @ Qp.conj().T


# ---------------------------------------------------------------------------
# Vandermonde retrieval
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VandermondeDecomposition:
    """Positive atomic decomposition T = sum_k c_k b(f_k) b(f_k)^H.

    rx_freqs is None for the single-level case. residual_norm is the relative
    Frobenius error of the reassembled matrix.
    """

    coefficients: np.ndarray
    tx_freqs: np.ndarray
    rx_freqs: np.ndarray | None
    residual_norm: float

    @property
    def order(self) -> int:
        return len(self.coefficients)


def _esprit_freqs(T: np.ndarray, order: int) -> np.ndarray:
    """Shift-invariance frequency estimates from the top-order eigenspace of T."""
    _, Q = np.linalg.eigh(T)
    Us = Q[:, -order:]
    psi, *_ = np.linalg.lstsq(Us[:-1], Us[1:], rcond=None)
    z = np.linalg.eigvals(psi)
    f = np.angle(z) / (2 * np.pi)
    return np.sort(f)


def _numerical_rank(T: np.ndarray, rank_tol: float) -> int:
    w = np.linalg.eigvalsh(0.5 * (T + T.conj().T))
    lam_max = max(w[-1], 0.0)
    if lam_max <= 0:
        return 0
    return int(np.sum(w >= rank_tol * lam_max))


def _nnls_fit(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Nonnegative least squares on a complex system, stacked as reals."""
    A_r = np.vstack([A.real, A.imag])
    b_r = np.concatenate([b.real, b.imag])
    c, _ = scipy.optimize.nnls(A_r, b_r)
    return c


def _retrieve_1d(T: np.ndarray, order: int, tol: float) -> VandermondeDecomposition:
    n = T.shape[0]
    t = toeplitz_diag_sums(T) / toeplitz_diag_counts(n)
    freqs = _esprit_freqs(T, order)
    k = np.arange(-(n - 1), n)
    E = np.exp(2j * np.pi * np.outer(k, freqs))
    c = _nnls_fit(E, t)
    keep = c > 1e-12 * max(c.max(initial=0.0), 1e-300)
    c, freqs = c[keep], freqs[keep]
    R = toeplitz(ToeplitzSeq.from_atoms(n, c, freqs))
    residual = np.linalg.norm(R - T) / max(np.linalg.norm(T), 1e-300)
    if residual > tol:
        raise RetrievalError(
            f"1D retrieval residual {residual:.3e} exceeds tolerance {tol:.3e}"
        )
    return VandermondeDecomposition(coefficients=c, tx_freqs=freqs,
                                    rx_freqs=None, residual_norm=float(residual))


def _retrieve_2d(T: np.ndarray, n_t: int, n_r: int, order: int,
                 rank_tol: float, tol: float) -> VandermondeDecomposition:
    V = two_level_diag_sums(T, n_t, n_r) / two_level_diag_counts(n_t, n_r)
    # marginal single-level matrices carry the tx / rx frequencies separately;
    # spurious candidates from an over-estimated marginal order are zeroed by
    # the nonnegative pairing fit below
    T_tx = toeplitz(ToeplitzSeq(n=n_t, t=V[:, n_r - 1]))
    T_rx = toeplitz(ToeplitzSeq(n=n_r, t=V[n_t - 1, :]))
    tx_cand = _esprit_freqs(T_tx, min(order, n_t - 1))
    rx_cand = _esprit_freqs(T_rx, min(order, n_r - 1))

    # pair candidates by nonnegative LS over the full matrix
    pairs = [(ft, fr) for ft in tx_cand for fr in rx_cand]
    cols = []
    for ft, fr in pairs:
        b = np.kron(steering_matrix(n_t, [ft])[:, 0], steering_matrix(n_r, [fr])[:, 0])
        cols.append(np.outer(b, b.conj()).ravel())
    A = np.array(cols).T
    c_all = _nnls_fit(A, T.ravel())
    keep = c_all > 1e-8 * max(c_all.max(initial=0.0), 1e-300)
    if keep.sum() > order:
        # keep the `order` largest masses
        top = np.argsort(c_all)[-order:]
        keep = np.zeros_like(keep)
        keep[top] = True
        keep &= c_all > 0
    c = c_all[keep]
    tx = np.array([pairs[i][0] for i in np.flatnonzero(keep)])
    rx = np.array([pairs[i][1] for i in np.flatnonzero(keep)])
    R = two_level_toeplitz(TwoLevelToeplitzSeq.from_atoms(n_t, n_r, c, tx, rx))
    residual = np.linalg.norm(R - T) / max(np.linalg.norm(T), 1e-300)
    if residual > tol:
        raise RetrievalError(
            f"2D retrieval residual {residual:.3e} exceeds tolerance {tol:.3e}"
        )
    idx = np.argsort(tx)
    return VandermondeDecomposition(coefficients=c[idx], tx_freqs=tx[idx],
                                    rx_freqs=rx[idx], residual_norm=float(residual))


def vandermonde_retrieve(T, n_t: int | None = None, n_r: int = 1,
                         model_order: int | None = None, tol: float = 1e-6,
                         rank_tol: float = 1e-3,
                         psd_tol: float = 1e-6) -> VandermondeDecomposition:
    """Retrieve frequencies and positive masses from a PSD (2-level) Toeplitz matrix.

    Accepts a matrix, a ToeplitzSeq, or a TwoLevelToeplitzSeq. The model order
    defaults to the numerical rank (eigenvalues >= rank_tol * lambda_max) and
    must respect the decomposition bounds: r <= n-1 in 1D, r < min(n_t, n_r)
    in 2D. Raises RetrievalError when the order is inconsistent or the
    reassembly residual exceeds tol. psd_tol loosens the input PSD acceptance
    for matrices coming out of a first-order solver.
    """
    if isinstance(T, ToeplitzSeq):
        n_t, n_r = T.n, 1
        T = toeplitz(T)
    elif isinstance(T, TwoLevelToeplitzSeq):
        n_t, n_r = T.n_t, T.n_r
        T = two_level_toeplitz(T)
    else:
        T = np.asarray(T, dtype=complex)
        if n_t is None:
            if n_r != 1:
                raise ValueError("n_t is required for matrix input")
            n_t = T.shape[0]
    if T.shape != (n_t * n_r, n_t * n_r):
        raise ValueError(f"matrix shape {T.shape} inconsistent with ({n_t}, {n_r})")
    if not is_psd(T, eps=psd_tol):
        raise RetrievalError("input matrix is not PSD within tolerance")

    order = model_order if model_order is not None else _numerical_rank(T, rank_tol)
    bound = n_t - 1 if n_r == 1 else min(n_t, n_r) - 1
    if not 1 <= order <= bound:
        raise RetrievalError(
            f"model order {order} is inconsistent: decomposition requires "
            f"1 <= r <= {bound} for dimensions ({n_t}, {n_r})"
        )
    if n_r == 1:
        return _retrieve_1d(T, order, tol)
    return _retrieve_2d(T, n_t, n_r, order, rank_tol, tol)
