import numpy as np
import pytest

import quasihelm as qh
from quasihelm.eigensolve import SpectralEigenpair
from quasihelm.reconstruct import field_magnitude_snapshot, reconstruct_field

TWO_PI = 2 * np.pi


def make_pair(idx, k, U=None, seed=0):
    if U is None:
        rng = np.random.default_rng(seed)
        U = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
        U /= np.linalg.norm(U)
    return SpectralEigenpair(lam=1.0, U=np.asarray(U, dtype=complex), k=k, residual=0.0)


def naive_sum(U, omega, pts):
    out = np.zeros(len(pts), dtype=complex)
    for i, r in enumerate(pts):
        acc = 0.0 + 0.0j
        for c, w in zip(U, omega):
            acc += c * np.exp(1j * np.dot(w, r))
        out[i] = acc
    return out


class TestReconstruct1D:
    def setup_method(self):
        self.g = qh.named_geometry("example1-2d")
        self.idx = qh.build_index_set(3, self.g.periods)
        self.k = np.array([0.35, 0.0])
        self.grid = qh.PhysicalSamplingGrid(r0=np.zeros(1), h=0.1, n=20, d=1)

    def test_single_mode_unit_magnitude(self):
        U = np.zeros(self.idx.size)
        U[7] = 1.0
        pair = make_pair(self.idx, self.k, U=U)
        fld = reconstruct_field(pair, self.g, self.idx, self.grid)
        assert fld.values.shape == (43,)
        assert np.allclose(np.abs(fld.values), 1.0, atol=1e-13)
        omega = (self.idx.frequencies[7] + self.k) @ self.g.P
        r = self.grid.axis(0, extended=True)
        assert np.allclose(fld.values, np.exp(1j * omega[0] * r), atol=1e-12)

    def test_value_at_origin_is_coefficient_sum(self):
        pair = make_pair(self.idx, self.k, seed=3)
        fld = reconstruct_field(pair, self.g, self.idx, self.grid)
        mid = self.grid.n + 1  # extended index of r = 0
        assert abs(fld.values[mid] - pair.U.sum()) < 1e-12

    def test_matches_naive_loop(self):
        pair = make_pair(self.idx, self.k, seed=4)
        fld = reconstruct_field(pair, self.g, self.idx, self.grid)
        pts = self.grid.points(extended=True)
        sel = np.arange(0, pts.shape[0], 5)
        want = naive_sum(pair.U, fld.frequencies, pts[sel])
        got = fld.values[sel]
        assert np.abs(got - want).max() <= 1e-12 * np.abs(want).max()

    def test_torus_consistency(self):
        # u(r) equals the embedded field evaluated at x = P r
        pair = make_pair(self.idx, self.k, seed=5)
        fld = reconstruct_field(pair, self.g, self.idx, self.grid)
        r = self.grid.axis(0, extended=True)[11]
        x = self.g.P @ np.array([r])
        torus_val = np.sum(pair.U * np.exp(1j * (self.idx.frequencies + self.k) @ x))
        assert abs(fld.values[11] - torus_val) < 1e-12 * abs(torus_val)

    def test_not_grid_periodic(self):
        # quasiperiodicity witness for the irrational geometry
        pair = make_pair(self.idx, self.k, seed=6)
        grid = qh.PhysicalSamplingGrid(r0=np.zeros(1), h=0.5, n=40, d=1)
        fld = reconstruct_field(pair, self.g, self.idx, grid)
        v = fld.values
        floors = []
        for s in range(1, 20):
            floors.append(np.abs(v[s:] - v[:-s]).max())
        assert min(floors) > 1e-3


class TestReconstruct2D:
    def setup_method(self):
        self.g = qh.named_geometry("example3-4d")
        self.idx = qh.build_index_set(2, self.g.periods)
        self.k = np.array([0.5, 0.2, 0.0, 0.0])
        self.grid = qh.PhysicalSamplingGrid(r0=np.zeros(2), h=0.2, n=6, d=2)

    def test_extended_shape(self):
        pair = make_pair(self.idx, self.k, seed=7)
        fld = reconstruct_field(pair, self.g, self.idx, self.grid)
        assert fld.values.shape == (15, 15)
        assert fld.inner().shape == (13, 13)

    def test_matches_naive_loop(self):
        pair = make_pair(self.idx, self.k, seed=8)
        fld = reconstruct_field(pair, self.g, self.idx, self.grid)
        pts = self.grid.points(extended=True)
        rng = np.random.default_rng(0)
        sel = rng.choice(pts.shape[0], size=10, replace=False)
        want = naive_sum(pair.U, fld.frequencies, pts[sel])
        got = fld.values.reshape(-1)[sel]
        assert np.abs(got - want).max() <= 1e-12 * np.abs(want).max()

    def test_magnitude_snapshot(self):
        pair = make_pair(self.idx, self.k, seed=9)
        fld = reconstruct_field(pair, self.g, self.idx, self.grid)
        snap = field_magnitude_snapshot(fld)
        assert snap.shape == fld.values.shape
        assert np.all(snap >= 0)
        assert snap.max() <= np.abs(pair.U).sum() + 1e-12

    def test_zero_vector(self):
        U = np.zeros(self.idx.size)
        pair = make_pair(self.idx, self.k, U=U)
        fld = reconstruct_field(pair, self.g, self.idx, self.grid)
        assert np.all(field_magnitude_snapshot(fld) == 0)
