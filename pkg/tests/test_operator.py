import math

import numpy as np
import pytest

import quasihelm as qh
from quasihelm.errors import InvalidArgument
from quasihelm.operator import MassOperator, assemble_stiffness, deflation_report

TWO_PI = 2 * np.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def random_positive_grid(N, d, rng, floor=0.5):
    """Fourier grid of a random real positive trigonometric coefficient."""

    class RandomTrig(qh.PeriodicCoefficient):
        periods = np.full(d, TWO_PI)
        is_real = True

        def __init__(self):
            self.d = d
            n_modes = 4
            self.modes = rng.integers(-2, 3, size=(n_modes, d))
            self.amps = rng.standard_normal(n_modes) * 0.2
            self.phases = rng.random(n_modes) * TWO_PI

        def evaluate(self, x):
            x = np.asarray(x, dtype=float)
            out = np.full(x.shape[:-1], 0.0)
            for m, a, ph in zip(self.modes, self.amps, self.phases):
                out = out + a * np.cos(np.tensordot(x, m.astype(float), axes=([-1], [0])) + ph)
            return out - out.min() + floor if out.ndim else out + floor

    coeff = RandomTrig()
    # shift so the sampled minimum is positive
    grid = qh.sample_to_fourier(coeff, N)
    return grid


def dense_wrap_oracle(grid):
    """Independent dense assembly: M[a, b] = E_{i_a - i_b mod 2N}."""
    N, d = grid.N, grid.d
    idx = qh.build_index_set(N, grid.periods)
    mi = idx.multi_indices
    size = idx.size
    M = np.empty((size, size), dtype=complex)
    for a in range(size):
        for b in range(size):
            diff = np.mod(mi[a] - mi[b] + N, 2 * N) - N
            M[a, b] = grid.coeffs[tuple(diff + N)]
    return M


class TestStiffness:
    def test_zero_frequency_deflated(self):
        g = qh.named_geometry("example1-2d")
        idx = qh.build_index_set(2, g.periods)
        K = assemble_stiffness(g, np.zeros(2), idx)
        rep = deflation_report(K)
        assert rep["count"] == 1
        assert rep["positions"] == [idx.position((0, 0))]

    def test_golden_direct_value(self):
        g = qh.named_geometry("golden-1d")
        theta = math.atan(GOLDEN)
        idx = qh.build_index_set(1, g.periods)
        K = assemble_stiffness(g, np.array([0.35, 0.0]), idx)
        pos = idx.position((0, 0))
        assert abs(K.values[pos] - (0.35 * math.cos(theta)) ** 2) < 1e-14
        assert K.n_deflated == 0

    def test_matches_direct_loop(self):
        g = qh.named_geometry("example3-4d")
        idx = qh.build_index_set(2, g.periods)
        k = np.array([0.5, 0.2, 0.0, 0.0])
        K = assemble_stiffness(g, k, idx)
        PPt = g.P @ g.P.T
        for m in range(0, idx.size, 7):
            w = idx.frequencies[m] + k
            assert abs(K.values[m] - w @ PPt @ w) < 1e-12 * max(1.0, K.values[m])

    def test_nonnegative(self):
        g = qh.named_geometry("example1-4d")
        idx = qh.build_index_set(3, g.periods)
        K = assemble_stiffness(g, np.array([0.5, 0.2, 0.0, 0.0]), idx)
        assert np.all(K.values >= 0)

    def test_kernel_shift_invariance(self):
        g = qh.named_geometry("example3-4d")
        idx = qh.build_index_set(2, g.periods)
        k = np.array([0.4, -0.1, 0.2, 0.05])
        import scipy.linalg as sla

        kernel = sla.null_space(g.P.T)
        assert kernel.shape[1] == 2
        K0 = assemble_stiffness(g, k, idx)
        K1 = assemble_stiffness(g, k + 0.37 * kernel[:, 0] - 1.4 * kernel[:, 1], idx)
        assert np.allclose(K0.values, K1.values, atol=1e-10)

    def test_degenerate_threshold(self):
        g = qh.named_geometry("example1-2d")
        idx = qh.build_index_set(2, g.periods)
        K = assemble_stiffness(g, np.array([0.35, 0.0]), idx, eps_k=np.inf)
        assert K.n_deflated == K.size


class TestMassApply:
    def test_constant_is_scaling(self):
        c = qh.coefficient_from_config({"kind": "constant", "value": 2.5}, (TWO_PI, TWO_PI))
        M = MassOperator.from_grid(qh.sample_to_fourier(c, 3))
        rng = np.random.default_rng(0)
        U = rng.standard_normal(M.size) + 1j * rng.standard_normal(M.size)
        assert np.allclose(M.apply(U), 2.5 * U, atol=1e-13)

    @pytest.mark.parametrize("d", [1, 2])
    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_fft_equals_dense_wrap(self, N, d):
        # d here is d_low; torus dimension is 2 * d
        rng = np.random.default_rng(10 * N + d)
        grid = random_positive_grid(N, 2 * d, rng)
        M = MassOperator.from_grid(grid)
        Md = dense_wrap_oracle(grid)
        for _ in range(3):
            U = rng.standard_normal(M.size) + 1j * rng.standard_normal(M.size)
            V = M.apply(U)
            Vd = Md @ U
            assert np.abs(V - Vd).max() <= 1e-12 * np.abs(Vd).max()

    def test_hermitian(self):
        rng = np.random.default_rng(4)
        grid = random_positive_grid(2, 2, rng)
        M = MassOperator.from_grid(grid)
        assert M.is_hermitian
        U = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        W = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        lhs = np.vdot(M.apply(U), W)
        rhs = np.vdot(U, M.apply(W))
        assert abs(lhs - rhs) <= 1e-12 * abs(lhs)

    def test_positive_definite(self):
        rng = np.random.default_rng(5)
        grid = random_positive_grid(2, 4, rng)
        M = MassOperator.from_grid(grid)
        for _ in range(5):
            U = rng.standard_normal(M.size) + 1j * rng.standard_normal(M.size)
            quad = np.vdot(U, M.apply(U))
            assert quad.real > -1e-12 * np.vdot(U, U).real
            assert abs(quad.imag) < 1e-10 * abs(quad.real)

    def test_linearity(self):
        rng = np.random.default_rng(6)
        grid = random_positive_grid(2, 2, rng)
        M = MassOperator.from_grid(grid)
        U = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        W = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        a, b = 1.3 - 0.2j, -0.7 + 2.1j
        lhs = M.apply(a * U + b * W)
        rhs = a * M.apply(U) + b * M.apply(W)
        assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(rhs).max()

    def test_length_mismatch(self):
        c = qh.coefficient_from_config({"kind": "constant", "value": 1.0}, (TWO_PI, TWO_PI))
        M = MassOperator.from_grid(qh.sample_to_fourier(c, 2))
        with pytest.raises(InvalidArgument):
            M.apply(np.zeros(7))

    def test_dense_helper_matches_oracle(self):
        rng = np.random.default_rng(7)
        grid = random_positive_grid(2, 2, rng)
        M = MassOperator.from_grid(grid)
        assert np.allclose(M.dense(), dense_wrap_oracle(grid), atol=1e-14)
