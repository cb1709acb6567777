"""Reconstruction of the physical-space eigenfunction from Fourier data.

The embedded eigenvector U defines the quasiperiodic field
u(r) = sum_xi U_xi exp(i omega_xi . r) with omega_xi = P^T (k + xi).
Evaluation is direct summation, exact to rounding, batched so memory stays
bounded; 2D tensor grids use the rank-one structure of each frequency term
(one complex GEMM per frequency block).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigensolve import SpectralEigenpair
from .errors import InvalidArgument
from .lattice import FourierIndexSet, PhysicalSamplingGrid, ProjectionGeometry

__all__ = ["ReconstructedField", "reconstruct_field", "field_magnitude_snapshot"]

_POINT_BLOCK = 2048
_FREQ_BLOCK = 4096


@dataclass(frozen=True)
class ReconstructedField:
    """Samples of the reconstructed field on the extended grid S(n+1).

    ``values`` has tensor shape (2n+3,) in 1D and (2n+3, 2n+3) in 2D;
    ``frequencies`` lists omega_xi = P^T (k + xi) in the J_v enumeration.
    """

    grid: PhysicalSamplingGrid
    values: np.ndarray = field(repr=False)
    frequencies: np.ndarray = field(repr=False)
    pair: SpectralEigenpair

    def __post_init__(self):
        self.values.setflags(write=False)
        self.frequencies.setflags(write=False)

    def inner(self) -> np.ndarray:
        """Crop the one-point extension ring, leaving the S(n) samples."""
        if self.grid.d == 1:
            return self.values[1:-1]
        return self.values[1:-1, 1:-1]


def physical_frequencies(
    pair: SpectralEigenpair, geom: ProjectionGeometry, idx: FourierIndexSet
) -> np.ndarray:
    """omega_xi = P^T (k + xi) for every index, shape (size, d_low)."""
    return (idx.frequencies + pair.k[None, :]) @ geom.P


def reconstruct_field(
    pair: SpectralEigenpair,
    geom: ProjectionGeometry,
    idx: FourierIndexSet,
    grid: PhysicalSamplingGrid,
) -> ReconstructedField:
    if grid.d != geom.d_low:
        raise InvalidArgument("grid dimension disagrees with geometry")
    if idx.size != pair.U.size:
        raise InvalidArgument("index set and eigenvector sizes disagree")
    omega = physical_frequencies(pair, geom, idx)
    if grid.d == 1:
        values = _evaluate_1d(pair.U, omega[:, 0], grid.axis(0, extended=True))
    else:
        values = _evaluate_2d(
            pair.U, omega, grid.axis(0, extended=True), grid.axis(1, extended=True)
        )
    values.setflags(write=False)
    return ReconstructedField(grid=grid, values=values, frequencies=omega, pair=pair)


def _evaluate_1d(U: np.ndarray, omega: np.ndarray, r: np.ndarray) -> np.ndarray:
    out = np.empty(r.size, dtype=complex)
    for start in range(0, r.size, _POINT_BLOCK):
        block = r[start : start + _POINT_BLOCK]
        out[start : start + _POINT_BLOCK] = np.exp(1j * np.outer(block, omega)) @ U
    return out


def _evaluate_2d(
    U: np.ndarray, omega: np.ndarray, r1: np.ndarray, r2: np.ndarray
) -> np.ndarray:
    out = np.zeros((r1.size, r2.size), dtype=complex)
    for start in range(0, U.size, _FREQ_BLOCK):
        sel = slice(start, min(start + _FREQ_BLOCK, U.size))
        e1 = np.exp(1j * np.outer(r1, omega[sel, 0]))  # (n1, block)
        e2 = np.exp(1j * np.outer(omega[sel, 1], r2))  # (block, n2)
        out += (e1 * U[sel][None, :]) @ e2
    return out


def field_magnitude_snapshot(fld: ReconstructedField) -> np.ndarray:
    """|u| per grid point, for file output."""
    return np.abs(fld.values)
