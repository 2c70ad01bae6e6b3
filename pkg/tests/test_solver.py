import numpy as np
import pytest

from fsanm import fs_toeplitz as fst
from fsanm.signal_model import FULL_BAND, FrequencyInterval, array_response
from fsanm.solver import SdpProblem, SolverOptions, atomic_norm, solve

TIGHT = SolverOptions(eps_abs=1e-9, eps_rel=1e-7, max_iter=100_000)


def steering(n, f):
    return array_response(n, f).values


class TestProblemValidation:
    def test_phi_shape(self):
        with pytest.raises(ValueError):
            SdpProblem(y=np.zeros(4), phi=np.zeros((4, 5)), mu=1.0, n_t=4)

    def test_mu_positive(self):
        with pytest.raises(ValueError):
            SdpProblem(y=np.zeros(4), phi=np.eye(4), mu=0.0, n_t=4)

    def test_fs_requires_beta(self):
        with pytest.raises(ValueError):
            SdpProblem(y=np.zeros(4), phi=np.eye(4), mu=1.0, n_t=4,
                       constraint_mode="fs")


class TestSolveBasics:
    def test_zero_measurement_gives_zero_solution(self):
        beta = fst.beta_coeffs(FrequencyInterval(-0.2, 0.2))
        p = SdpProblem(y=np.zeros(6), phi=np.eye(6), mu=0.5, n_t=6, beta1=beta)
        sol = solve(p)
        assert sol.converged
        np.testing.assert_array_equal(sol.h_hat, np.zeros(6))
        assert sol.objective == 0.0
        np.testing.assert_array_equal(sol.toeplitz_seq.t, np.zeros(11))

    def test_noiseless_single_atom_near_exact(self):
        n, f = 12, 0.1
        iv = FrequencyInterval(-0.05, 0.25)
        h_true = (1.3 - 0.4j) * steering(n, f)
        p = SdpProblem(y=h_true, phi=np.eye(n), mu=1e-4, n_t=n,
                       beta1=fst.beta_coeffs(iv))
        sol = solve(p)
        assert sol.converged
        rel = np.linalg.norm(sol.h_hat - h_true) / np.linalg.norm(h_true)
        assert rel < 1e-2

    def test_scaling_equivariance(self):
        rng = np.random.default_rng(0)
        n, s = 8, 6
        iv = FrequencyInterval(-0.3, 0.3)
        phi = rng.standard_normal((s, n)) + 1j * rng.standard_normal((s, n))
        y = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        c = 2.7 * np.exp(0.6j)
        opts = SolverOptions(eps_abs=1e-8, eps_rel=1e-6, max_iter=50_000)
        base = solve(SdpProblem(y=y, phi=phi, mu=0.8, n_t=n,
                                beta1=fst.beta_coeffs(iv)), opts)
        scaled = solve(SdpProblem(y=c * y, phi=phi, mu=0.8 * abs(c), n_t=n,
                                  beta1=fst.beta_coeffs(iv)), opts)
        np.testing.assert_allclose(scaled.h_hat, c * base.h_hat,
                                   atol=1e-5 * np.linalg.norm(base.h_hat))

    def test_plain_equals_full_band_fs(self):
        rng = np.random.default_rng(1)
        n, s = 10, 7
        phi = rng.standard_normal((s, n)) + 1j * rng.standard_normal((s, n))
        y = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        opts = SolverOptions(eps_abs=1e-9, eps_rel=1e-7, max_iter=100_000)
        fs = solve(SdpProblem(y=y, phi=phi, mu=1.0, n_t=n,
                              beta1=fst.beta_coeffs(FULL_BAND)), opts)
        plain = solve(SdpProblem(y=y, phi=phi, mu=1.0, n_t=n,
                                 constraint_mode="plain"), opts)
        diff = np.linalg.norm(fs.h_hat - plain.h_hat)
        assert diff <= 10 * 1e-5 * max(1.0, np.linalg.norm(plain.h_hat))

    def test_nonconvergence_reported(self):
        rng = np.random.default_rng(2)
        y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        p = SdpProblem(y=y, phi=np.eye(8), mu=0.1, n_t=8,
                       constraint_mode="plain")
        sol = solve(p, SolverOptions(max_iter=3))
        assert not sol.converged
        assert sol.iterations == 3


class TestSolutionFeasibility:
    def test_psd_invariant_at_tight_tolerance(self):
        # at eps ~ 1e-10 the exit point passes the library's default
        # scale-invariant PSD acceptance (1e-8)
        rng = np.random.default_rng(3)
        n, s = 8, 6
        iv = FrequencyInterval(-0.25, 0.15)
        phi = rng.standard_normal((s, n)) + 1j * rng.standard_normal((s, n))
        y = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        opts = SolverOptions(eps_abs=1e-10, eps_rel=1e-10, max_iter=400_000)
        sol = solve(SdpProblem(y=y, phi=phi, mu=0.7, n_t=n,
                               beta1=fst.beta_coeffs(iv)), opts)
        assert sol.converged
        T = fst.toeplitz(sol.toeplitz_seq)
        arrow = np.zeros((n + 1, n + 1), dtype=complex)
        arrow[:n, :n] = T
        arrow[:n, n] = sol.h_hat
        arrow[n, :n] = sol.h_hat.conj()
        arrow[n, n] = sol.t_scalar
        assert fst.is_psd(arrow)
        assert fst.is_psd(fst.t_beta_1d(sol.toeplitz_seq, fst.beta_coeffs(iv)))

    def test_psd_violation_bounded_by_primal_residual(self):
        rng = np.random.default_rng(4)
        n, s = 10, 8
        phi = rng.standard_normal((s, n)) + 1j * rng.standard_normal((s, n))
        y = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        sol = solve(SdpProblem(y=y, phi=phi, mu=0.5, n_t=n,
                               constraint_mode="plain"),
                    SolverOptions(eps_abs=1e-6, eps_rel=1e-4))
        assert sol.converged
        T = fst.toeplitz(sol.toeplitz_seq)
        arrow = np.zeros((n + 1, n + 1), dtype=complex)
        arrow[:n, :n] = T
        arrow[:n, n] = sol.h_hat
        arrow[n, :n] = sol.h_hat.conj()
        arrow[n, n] = sol.t_scalar
        # violation cannot exceed the reported primal residual (unnormalized)
        scale = np.linalg.norm(y)
        assert fst.min_eigenvalue(arrow) >= -1.5 * sol.primal_residual * scale

    def test_objective_monotone_up_to_window_fluctuations(self):
        rng = np.random.default_rng(5)
        n, s = 16, 12
        phi = rng.standard_normal((s, n)) + 1j * rng.standard_normal((s, n))
        f = 0.12
        y = phi @ ((1.0 + 0.5j) * steering(n, f)) + 0.1 * (
            rng.standard_normal(s) + 1j * rng.standard_normal(s))
        iv = FrequencyInterval(-0.1, 0.3)
        sol = solve(SdpProblem(y=y, phi=phi, mu=0.3, n_t=n,
                               beta1=fst.beta_coeffs(iv)),
                    SolverOptions(trace=True, max_iter=20_000))
        obj = sol.trace[:, 2]
        window = 50
        n_win = len(obj) // window
        means = [obj[i * window:(i + 1) * window].mean() for i in range(n_win)]
        tol = 1e-6 * max(1.0, abs(means[0]))
        for a, b in zip(means, means[1:]):
            assert b <= a + tol


class TestAtomicNorm:
    def test_zero_vector(self):
        assert atomic_norm(np.zeros(8), 8, tx_interval=FULL_BAND) == 0.0

    def test_single_atom_value_1d(self):
        iv = FrequencyInterval(-0.1, 0.35)
        h = 3.0 * steering(16, 0.2)
        v = atomic_norm(h, 16, tx_interval=iv, opts=TIGHT)
        assert abs(v - 3.0) <= 1e-3 * 3.0

    def test_single_atom_value_2d(self):
        iv1 = FrequencyInterval(-0.3, 0.0)
        iv2 = FrequencyInterval(0.1, 0.45)
        alpha = 1.7 * np.exp(1.1j)
        b = np.kron(steering(6, -0.12), steering(4, 0.3))
        v = atomic_norm(alpha * b, 6, 4, tx_interval=iv1, rx_interval=iv2,
                        opts=TIGHT)
        assert abs(v - abs(alpha)) <= 1e-3 * abs(alpha)

    def test_two_separated_atoms_triangle_equality(self):
        iv = FrequencyInterval(-0.4, 0.4)
        a1, a2 = 2.0, 1.5
        h = a1 * steering(24, -0.2) + a2 * steering(24, 0.25)
        v = atomic_norm(h, 24, tx_interval=iv, opts=TIGHT)
        assert v <= (a1 + a2) * (1 + 1e-6)
        assert abs(v - (a1 + a2)) <= 1e-3 * (a1 + a2)

    def test_requires_interval_in_fs_mode(self):
        with pytest.raises(ValueError):
            atomic_norm(np.ones(4), 4, mode="fs")


class TestAgainstConvexSolver:
    """Independent oracle: the same SDP solved by a generic convex solver."""

    def test_1d_fs_matches_cvxpy(self):
        cp = pytest.importorskip("cvxpy")
        rng = np.random.default_rng(6)
        n, s = 6, 5
        iv = FrequencyInterval(-0.2, 0.3)
        beta = fst.beta_coeffs(iv)
        phi = rng.standard_normal((s, n)) + 1j * rng.standard_normal((s, n))
        y = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        mu = 1.2

        t = cp.Variable(2 * n - 1, complex=True)
        tau = cp.Variable()
        h = cp.Variable(n, complex=True)
        T = cp.bmat([[t[n - 1 + i - j] for j in range(n)] for i in range(n)])
        w = [beta.r_minus1, beta.r_0, beta.r_plus1]
        Tb = cp.bmat([[sum(w[k + 1] * t[n - 1 + i - j - k] for k in (-1, 0, 1))
                       for j in range(n - 1)] for i in range(n - 1)])
        arrow = cp.bmat([[T, cp.reshape(h, (n, 1))],
                         [cp.reshape(cp.conj(h), (1, n)), cp.reshape(tau, (1, 1))]])
        obj = 0.5 * cp.sum_squares(y - phi @ h) \
            + mu * (cp.real(cp.trace(T)) / (2 * n) + tau / 2)
        prob = cp.Problem(cp.Minimize(obj),
                          [arrow >> 0, Tb >> 0, Tb == Tb.H, T == T.H])
        prob.solve(solver=cp.SCS, eps=1e-7, max_iters=200_000)

        sol = solve(SdpProblem(y=y, phi=phi, mu=mu, n_t=n, beta1=beta),
                    SolverOptions(eps_abs=1e-9, eps_rel=1e-8, max_iter=300_000))
        assert sol.converged
        assert abs(sol.objective - prob.value) <= 1e-4 * max(1.0, abs(prob.value))
        np.testing.assert_allclose(sol.h_hat, h.value, atol=2e-3)
