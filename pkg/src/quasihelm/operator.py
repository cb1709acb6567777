"""Embedded-space operators: diagonal stiffness and matrix-free mass.

The stiffness operator is the Fourier multiplier ||P^T (k + xi)||^2 and is
stored as an explicit diagonal.  The mass operator is circular convolution
by the coefficient's Fourier components, applied through forward/inverse
FFTs so one application costs O(N_F log N_F).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .coefficients import FourierCoefficientGrid
from .errors import InvalidArgument
from .lattice import FourierIndexSet, ProjectionGeometry

__all__ = [
    "StiffnessDiagonal",
    "MassOperator",
    "assemble_stiffness",
    "deflation_report",
    "dense_mass_matrix",
]

DEFAULT_DEFLATION_RTOL = 1e-10


@dataclass(frozen=True)
class StiffnessDiagonal:
    """Diagonal of the directional Laplacian in the J_v enumeration."""

    values: np.ndarray  # (size,) float, >= 0
    mask: np.ndarray  # (size,) bool, True where deflated
    threshold: float

    def __post_init__(self):
        self.values.setflags(write=False)
        self.mask.setflags(write=False)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def n_deflated(self) -> int:
        return int(np.sum(self.mask))


def assemble_stiffness(
    geom: ProjectionGeometry,
    k: np.ndarray,
    idx: FourierIndexSet,
    eps_k: float | None = None,
) -> StiffnessDiagonal:
    """values[m] = ||P^T (k + xi_m)||^2 with a deflation mask below eps_k.

    The default threshold is 1e-10 times the largest diagonal entry.
    """
    k = np.asarray(k, dtype=float).ravel()
    if k.shape != (geom.d_high,):
        raise InvalidArgument(f"Bloch vector must have length {geom.d_high}")
    if idx.d != geom.d_high:
        raise InvalidArgument("index set dimension disagrees with geometry")
    shifted = idx.frequencies + k[None, :]
    low = shifted @ geom.P  # (size, d_low)
    values = np.einsum("md,md->m", low, low)
    values = np.maximum(values, 0.0)
    if eps_k is None:
        eps_k = DEFAULT_DEFLATION_RTOL * float(values.max())
    mask = values < eps_k
    return StiffnessDiagonal(values=values, mask=mask, threshold=float(eps_k))


def deflation_report(K: StiffnessDiagonal) -> dict:
    """Deflated entries (flat positions) and their count."""
    positions = np.nonzero(K.mask)[0]
    return {
        "count": int(positions.size),
        "positions": [int(p) for p in positions],
        "threshold": K.threshold,
    }


@dataclass(frozen=True)
class MassOperator:
    """Matrix-free circular convolution V_xi = sum_xi' E_{xi-xi'} U_xi'.

    The index difference wraps modulo the 2N-per-axis bin grid, which makes
    the product exactly the standard FFT circular convolution after mapping
    lattice order to FFT bin order.  ``samples`` holds the coefficient on
    the 2N-per-axis collocation grid (the diagonal of the operator in real
    space).
    """

    grid: FourierCoefficientGrid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.samples.setflags(write=False)

    @classmethod
    def from_grid(cls, grid: FourierCoefficientGrid) -> "MassOperator":
        bins = sfft.ifftshift(grid.coeffs)
        samples = sfft.ifftn(bins) * grid.size
        if grid.is_real:
            samples = samples.real.astype(complex)
        return cls(grid=grid, samples=samples)

    @property
    def size(self) -> int:
        return self.grid.size

    @property
    def shape(self) -> tuple:
        return self.grid.coeffs.shape

    @property
    def is_hermitian(self) -> bool:
        return self.grid.is_real

    def apply(self, U: np.ndarray) -> np.ndarray:
        """One mass application in J_v order; O(N_F log N_F)."""
        U = np.asarray(U)
        if U.shape != (self.size,):
            raise InvalidArgument(
                f"vector has length {U.shape}, operator expects ({self.size},)"
            )
        tensor = U.reshape(self.shape)
        bins = sfft.ifftshift(tensor)
        mixed = self.samples * sfft.ifftn(bins)
        out = sfft.fftshift(sfft.fftn(mixed))
        return out.reshape(-1)

    def __matmul__(self, U: np.ndarray) -> np.ndarray:
        return self.apply(U)

    def dense(self, rows: np.ndarray | None = None, cols: np.ndarray | None = None) -> np.ndarray:
        """Dense Toeplitz block M_{xi xi'} = E_{xi - xi'} with wrap.

        Intended for the small-problem eigensolver fallback; rows/cols select
        flat positions of the index enumeration (defaults: all).
        """
        return dense_mass_matrix(self.grid, rows=rows, cols=cols)


def dense_mass_matrix(
    grid: FourierCoefficientGrid,
    rows: np.ndarray | None = None,
    cols: np.ndarray | None = None,
) -> np.ndarray:
    N, d = grid.N, grid.d
    size = grid.size
    rows = np.arange(size) if rows is None else np.asarray(rows)
    cols = np.arange(size) if cols is None else np.asarray(cols)
    # Flat position -> integer multi-index, lexicographic layout.
    def unravel(pos):
        mi = np.empty((pos.size, d), dtype=np.int64)
        rem = pos.astype(np.int64)
        for m in range(d - 1, -1, -1):
            mi[:, m] = rem % (2 * N) - N
            rem //= 2 * N
        return mi

    mi_rows = unravel(rows)
    mi_cols = unravel(cols)
    flat = grid.vector()
    out = np.empty((rows.size, cols.size), dtype=complex)
    for a in range(rows.size):  # row loop bounds peak memory at O(size * d)
        diff = np.mod(mi_rows[a][None, :] - mi_cols + N, 2 * N) - N
        pos = np.zeros(cols.size, dtype=np.int64)
        for m in range(d):
            pos = pos * (2 * N) + (diff[:, m] + N)
        out[a] = flat[pos]
    return out
