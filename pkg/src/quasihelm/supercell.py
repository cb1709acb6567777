"""Crystalline-approximant baseline: rational approximants and folded bands.

Replacing the irrational projection ratios by continued-fraction convergents
turns the quasiperiodic coefficient into a periodic one on a finite
supercell.  Bloch finite-difference eigenproblems on that supercell produce
the densely folded band structure the projected pipeline is compared
against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coefficients import PeriodicCoefficient
from .errors import ApproximantTooFine, InvalidArgument, InvalidCoefficient
from .lattice import ProjectionGeometry, lift_wavevector

__all__ = [
    "RationalApproximant",
    "SupercellModel",
    "FoldedBandSet",
    "convergents",
    "rationalize_geometry",
    "build_supercell",
    "folded_bands",
    "band_path",
    "lifted_path",
]

DEFAULT_PERIOD_CAP = 1e5
_DENSE_BAND_LIMIT = 2048


def convergents(x: float, q_max: int) -> list[tuple[int, int]]:
    """Continued-fraction convergents p/q of x with q <= q_max.

    Terminates early once the expansion is exhausted (rational input).
    Leading 0/1 convergents (x < 1) are dropped; every emitted convergent
    satisfies |x - p/q| < 1/q^2.
    """
    if q_max < 1:
        raise InvalidArgument("q_max must be >= 1")
    out = []
    p_prev, q_prev = 0, 1
    p_cur, q_cur = 1, 0
    value = float(x)
    for _ in range(64):
        a = math.floor(value)
        p_next = a * p_cur + p_prev
        q_next = a * q_cur + q_prev
        if q_next > q_max:
            break
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_next, q_next
        if p_cur != 0:
            out.append((p_cur, q_cur))
        frac = value - a
        if frac < 1e-15 * max(1.0, abs(value)):
            break  # rational: expansion terminated exactly
        value = 1.0 / frac
    if not out:
        raise InvalidArgument(f"no convergent of {x} with denominator <= {q_max}")
    return out


@dataclass(frozen=True)
class RationalApproximant:
    """Selected convergents for the projection ratios of one geometry.

    ``targets`` are the irrational ratios being approximated, ``table``
    their full convergent lists, and ``selected`` the largest-denominator
    convergent per ratio.  ``period`` is the induced supercell period in the
    x-direction of the physical domain.
    """

    targets: tuple
    table: tuple
    selected: tuple
    period: float


def rationalize_geometry(
    geom: ProjectionGeometry, q_max: int, period_cap: float = DEFAULT_PERIOD_CAP
) -> RationalApproximant:
    """Commensurate the x-direction of a geometry with convergents q <= q_max.

    1D: the single slope ratio (p2 T1)/(p1 T2) is rationalized and the
    supercell period is q T1 / p1.  2D: the three ratios
    (p_j1 T1)/(p_11 T_j), j = 2..4, are rationalized and the period is
    lcm(q_2, q_3, q_4) T1 / p_11; the second column is left untouched.
    """
    P, T = geom.P, geom.periods
    if geom.d_low == 1:
        ratios = [(P[1, 0] * T[0]) / (P[0, 0] * T[1])]
    else:
        ratios = [(P[j, 0] * T[0]) / (P[0, 0] * T[j]) for j in range(1, 4)]
    table = tuple(tuple(convergents(x, q_max)) for x in ratios)
    selected = tuple(tab[-1] for tab in table)
    denominator = math.lcm(*[q for _, q in selected])
    period = denominator * T[0] / P[0, 0]
    if period > period_cap:
        raise ApproximantTooFine(
            f"supercell period {period:.3e} exceeds the cap {period_cap:.3e}"
        )
    return RationalApproximant(
        targets=tuple(ratios), table=table, selected=selected, period=float(period)
    )


@dataclass(frozen=True)
class SupercellModel:
    """Periodic approximant coefficient sampled on the supercell mesh."""

    period: float
    mesh: int
    eps: np.ndarray = field(repr=False)  # (mesh,) in 1D, (mesh, mesh) in 2D
    dimension: int
    approximant: RationalApproximant
    P_rational: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.eps.setflags(write=False)

    @property
    def h(self) -> float:
        return self.period / self.mesh


def build_supercell(
    coeff: PeriodicCoefficient,
    geom: ProjectionGeometry,
    approximant: RationalApproximant,
    mesh: int,
) -> SupercellModel:
    """Sample the rationalized coefficient over one supercell period.

    The designated ratios of P are replaced by the approximant's selected
    convergents, after which the coefficient is exactly periodic in the
    x-direction with period ``approximant.period``.
    """
    if mesh < 8:
        raise InvalidArgument("mesh must be at least 8 points")
    P, T = geom.P.copy(), geom.periods
    if geom.d_low == 1:
        (p, q), = approximant.selected
        P[1, 0] = P[0, 0] * (p / q) * (T[1] / T[0])
    else:
        for j, (p, q) in zip(range(1, 4), approximant.selected):
            P[j, 0] = P[0, 0] * (p / q) * (T[j] / T[0])
    Tsc = approximant.period
    if geom.d_low == 1:
        r = Tsc * np.arange(mesh) / mesh
        eps = coeff.evaluate(np.outer(r, P[:, 0]))
    else:
        r = Tsc * np.arange(mesh) / mesh
        rx, ry = np.meshgrid(r, r, indexing="ij")
        pts = np.stack([rx, ry], axis=-1)
        eps = coeff.evaluate(pts @ P.T)
    if np.any(eps <= 0):
        raise InvalidCoefficient("approximant coefficient is not strictly positive")
    return SupercellModel(
        period=Tsc,
        mesh=mesh,
        eps=np.asarray(eps, dtype=float),
        dimension=geom.d_low,
        approximant=approximant,
        P_rational=P,
    )


@dataclass(frozen=True)
class FoldedBandSet:
    """Sorted eigenvalue lists per sampled wave number."""

    ks: np.ndarray
    bands: np.ndarray = field(repr=False)  # (n_k, n_bands), nan rows on failure
    failures: tuple

    @property
    def n_bands(self) -> int:
        return self.bands.shape[1]


def folded_bands(model: SupercellModel, ks: np.ndarray, n_bands: int) -> FoldedBandSet:
    """Bloch FD bands of the supercell along the k path, ascending per k."""
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    if n_bands < 1:
        raise InvalidArgument("n_bands must be >= 1")
    bands = np.full((ks.size, n_bands), np.nan)
    failures = []
    for i, k in enumerate(ks):
        try:
            if model.dimension == 1:
                bands[i] = _bands_1d(model, float(k), n_bands)
            else:
                bands[i] = _bands_2d(model, float(k), n_bands)
        except Exception as exc:  # record and continue the sweep
            failures.append((i, float(k), repr(exc)))
    return FoldedBandSet(ks=ks, bands=bands, failures=tuple(failures))


def _bands_1d(model: SupercellModel, k: float, n_bands: int) -> np.ndarray:
    m, h = model.mesh, model.h
    if n_bands > m:
        raise InvalidArgument("more bands requested than mesh unknowns")
    phase = np.exp(1j * k * model.period)
    if m <= _DENSE_BAND_LIMIT:
        A = np.zeros((m, m), dtype=complex)
        idx = np.arange(m)
        A[idx, idx] = 2.0
        A[idx[:-1], idx[:-1] + 1] = -1.0
        A[idx[:-1] + 1, idx[:-1]] = -1.0
        A[m - 1, 0] += -phase
        A[0, m - 1] += -np.conj(phase)
        A /= h**2
        vals = sla.eigh(
            A, np.diag(model.eps), subset_by_index=[0, n_bands - 1], eigvals_only=True
        )
        return vals
    diags = [np.full(m, 2.0), np.full(m - 1, -1.0), np.full(m - 1, -1.0)]
    A = sp.diags(diags, [0, 1, -1], format="lil", dtype=complex)
    A[m - 1, 0] += -phase
    A[0, m - 1] += -np.conj(phase)
    A = (A / h**2).tocsc()
    B = sp.diags(model.eps).tocsc()
    sigma = -1e-9 * float(np.max(np.abs(A.diagonal())))
    vals = spla.eigsh(
        A, k=n_bands, M=B, sigma=sigma, which="LM", return_eigenvectors=False
    )
    return np.sort(vals.real)


def _bands_2d(model: SupercellModel, k: float, n_bands: int) -> np.ndarray:
    m, h = model.mesh, model.h
    phase = np.exp(1j * k * model.period)
    shift = sp.lil_matrix((m, m), dtype=complex)
    shift[np.arange(m - 1), np.arange(1, m)] = 1.0
    shift_x = shift.copy()
    shift_x[m - 1, 0] = phase  # Bloch wrap in x
    shift_y = shift.copy()
    shift_y[m - 1, 0] = 1.0  # plain periodic wrap in y
    eye = sp.identity(m, dtype=complex, format="csr")
    lap_x = 2.0 * eye - shift_x - shift_x.conj().T
    lap_y = 2.0 * eye - shift_y - shift_y.conj().T
    A = (sp.kron(lap_x, eye) + sp.kron(eye, lap_y)).tocsc() / h**2
    B = sp.diags(model.eps.reshape(-1)).tocsc()
    sigma = -1e-9 * float(np.max(np.abs(A.diagonal())))
    vals = spla.eigsh(
        A, k=n_bands, M=B, sigma=sigma, which="LM", return_eigenvectors=False
    )
    return np.sort(vals.real)


def band_path(name: str, n_samples: int, k_max: float) -> np.ndarray:
    """Uniform samples of a named path; endpoints are hit exactly.

    "gamma-x" (1D): scalars k_x in [0, k_max].
    "gamma-m" (2D): points (k_x, 0) with k_x in [0, k_max].
    """
    if n_samples < 2:
        raise InvalidArgument("need at least 2 samples")
    kx = np.linspace(0.0, k_max, n_samples)
    if name == "gamma-x":
        return kx[:, None]
    if name == "gamma-m":
        return np.stack([kx, np.zeros_like(kx)], axis=1)
    raise InvalidArgument(f"unknown path {name!r}; known: gamma-x, gamma-m")


def lifted_path(k_lows: np.ndarray, geom: ProjectionGeometry) -> np.ndarray:
    """Lift every low-dimensional path sample to the embedded torus."""
    return np.stack([lift_wavevector(k, geom) for k in np.atleast_2d(k_lows)])
