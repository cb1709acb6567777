"""Projection geometry, torus index sets, Bloch vectors, and sampling grids.

The physical problem lives in ``d_low`` dimensions (1 or 2) and is lifted to a
periodic torus in ``d_high = 2 * d_low`` dimensions through a projection
matrix ``P`` whose rows are rationally independent.  Everything downstream
(stiffness diagonal, convolution mass operator, reconstruction frequencies)
is phrased in terms of the objects defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, SingularGeometry

__all__ = [
    "ProjectionGeometry",
    "FourierIndexSet",
    "PhysicalSamplingGrid",
    "named_geometry",
    "GEOMETRY_CATALOG",
    "build_index_set",
    "lift_wavevector",
    "project_point",
    "rational_independence_diagnostic",
    "as_bloch_vector",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ProjectionGeometry:
    """Cut-and-project geometry: torus periods plus the projection matrix.

    ``P`` has shape (d_high, d_low); row j is the direction vector p_j so the
    lifted coordinate is x = P r.  ``periods`` holds the torus periods T_m.
    """

    P: np.ndarray
    periods: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        if P.shape[1] > P.shape[0]:
            raise InvalidArgument(f"projection matrix must be tall, got shape {P.shape}")
        periods = np.asarray(self.periods, dtype=float).ravel()
        if P.shape != (2 * P.shape[1], P.shape[1]):
            raise InvalidArgument(
                f"expected d_high = 2*d_low, got P of shape {P.shape}"
            )
        if periods.shape != (P.shape[0],):
            raise InvalidArgument(
                f"need {P.shape[0]} periods, got {periods.shape}"
            )
        if np.any(periods <= 0) or not np.all(np.isfinite(periods)):
            raise InvalidArgument("torus periods must be strictly positive and finite")
        if not np.all(np.isfinite(P)):
            raise InvalidArgument("projection matrix entries must be finite")
        P.setflags(write=False)
        periods.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "periods", periods)

    @property
    def d_low(self) -> int:
        return self.P.shape[1]

    @property
    def d_high(self) -> int:
        return self.P.shape[0]

    def row(self, j: int) -> np.ndarray:
        """Direction vector p_j (row j of P)."""
        return self.P[j]


def _golden_1d() -> ProjectionGeometry:
    theta = math.atan(_GOLDEN)
    return ProjectionGeometry(
        P=np.array([[math.cos(theta)], [math.sin(theta)]]),
        periods=np.array([2 * math.pi, 2 * math.pi]),
    )


def _harmonic_1d() -> ProjectionGeometry:
    # Unnormalized golden direction (1, (sqrt5-1)/2).
    return ProjectionGeometry(
        P=np.array([[1.0], [_GOLDEN]]),
        periods=np.array([2 * math.pi, 2 * math.pi]),
    )


def _surd_4d() -> ProjectionGeometry:
    rows = [
        [1.0, math.sqrt(2.0)],
        [math.sqrt(3.0), 1.0],
        [math.sqrt(5.0), math.sqrt(7.0)],
        [math.sqrt(11.0), math.sqrt(13.0)],
    ]
    return ProjectionGeometry(P=np.array(rows), periods=np.full(4, 2 * math.pi))


def _mixed_4d() -> ProjectionGeometry:
    rows = [
        [1.0, math.sqrt(7.0)],
        [math.sqrt(2.0), 1.0],
        [math.sqrt(3.0), math.exp(-1.0)],
        [math.sqrt(5.0), math.e],
    ]
    return ProjectionGeometry(P=np.array(rows), periods=np.full(4, 2 * math.pi))


GEOMETRY_CATALOG = {
    "golden-1d": _golden_1d,
    "example1-2d": _harmonic_1d,
    "example1-4d": _mixed_4d,
    "example3-4d": _surd_4d,
    "example4-4d": _surd_4d,
}


def named_geometry(name: str) -> ProjectionGeometry:
    """Look up a catalog geometry by name."""
    try:
        return GEOMETRY_CATALOG[name]()
    except KeyError:
        raise InvalidArgument(
            f"unknown geometry {name!r}; known: {sorted(GEOMETRY_CATALOG)}"
        ) from None


@dataclass(frozen=True)
class FourierIndexSet:
    """Truncated reciprocal index set of the torus.

    Integer multi-indices i = (i_1, ..., i_d) run over {-N, ..., N-1} per
    axis and are enumerated lexicographically; this order defines the
    vectorization used by every operator in the package.  The frequency of
    index i is xi_m = 2*pi*i_m / T_m.
    """

    N: int
    periods: np.ndarray
    multi_indices: np.ndarray = field(repr=False)  # (size, d) int
    frequencies: np.ndarray = field(repr=False)  # (size, d) float

    @property
    def d(self) -> int:
        return self.periods.shape[0]

    @property
    def size(self) -> int:
        return self.multi_indices.shape[0]

    @property
    def shape(self) -> tuple:
        """Tensor shape (2N,)*d of the lattice-ordered coefficient array."""
        return (2 * self.N,) * self.d

    def position(self, multi_index) -> int:
        """Flat position of one integer multi-index in the enumeration."""
        mi = np.asarray(multi_index, dtype=int)
        if mi.shape != (self.d,):
            raise InvalidArgument(f"multi-index must have length {self.d}")
        if np.any(mi < -self.N) or np.any(mi >= self.N):
            raise InvalidArgument(f"multi-index {mi} outside [-N, N-1] with N={self.N}")
        pos = 0
        for m in range(self.d):
            pos = pos * (2 * self.N) + (int(mi[m]) + self.N)
        return pos

    def positions(self, multi_indices: np.ndarray) -> np.ndarray:
        """Vectorized ``position`` for an (M, d) array of multi-indices."""
        mi = np.asarray(multi_indices, dtype=int)
        pos = np.zeros(mi.shape[0], dtype=np.int64)
        for m in range(self.d):
            pos = pos * (2 * self.N) + (mi[:, m] + self.N)
        return pos


def build_index_set(N: int, periods) -> FourierIndexSet:
    """All (2N)^d frequency vectors in lexicographic multi-index order."""
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidArgument(f"truncation N must be a positive integer, got {N!r}")
    periods = np.asarray(periods, dtype=float).ravel()
    if periods.size == 0 or np.any(periods <= 0):
        raise InvalidArgument("periods must be strictly positive")
    d = periods.size
    axes = [np.arange(-N, N) for _ in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    multi = np.stack([m.ravel() for m in mesh], axis=1).astype(int)
    freqs = multi * (2 * np.pi / periods)[None, :]
    periods = periods.copy()
    for arr in (periods, multi, freqs):
        arr.setflags(write=False)
    return FourierIndexSet(N=int(N), periods=periods, multi_indices=multi, frequencies=freqs)


def as_bloch_vector(k, d_high: int) -> np.ndarray:
    """Validate and return a Bloch vector of length d_high."""
    k = np.asarray(k, dtype=float).ravel()
    if k.shape != (d_high,):
        raise InvalidArgument(f"Bloch vector must have length {d_high}, got {k.shape}")
    if not np.all(np.isfinite(k)):
        raise InvalidArgument("Bloch vector entries must be finite")
    return k


def lift_wavevector(k_low, geom: ProjectionGeometry) -> np.ndarray:
    """Minimum-norm k_high with P^T k_high = k_low.

    Solved through the pseudoinverse (least-squares on P^T), which is the
    unique minimum-norm solution when P has full column rank.
    """
    k_low = np.asarray(k_low, dtype=float).ravel()
    if k_low.shape != (geom.d_low,):
        raise InvalidArgument(
            f"low-dimensional wavevector must have length {geom.d_low}"
        )
    if np.linalg.matrix_rank(geom.P) < geom.d_low:
        raise SingularGeometry("projection matrix is rank deficient; cannot lift")
    k_high, *_ = np.linalg.lstsq(geom.P.T, k_low, rcond=None)
    resid = np.linalg.norm(geom.P.T @ k_high - k_low)
    if resid > 1e-12 * (1.0 + np.linalg.norm(k_low)):
        raise SingularGeometry(f"lift residual {resid:.3e} exceeds tolerance")
    return k_high


def project_point(geom: ProjectionGeometry, r) -> np.ndarray:
    """Torus point x = P r wrapped componentwise into [0, T_m)."""
    r = np.asarray(r, dtype=float)
    x = r @ geom.P.T if r.ndim > 1 else geom.P @ r.ravel()
    x = np.mod(x, geom.periods)
    # mod can return T_m itself when P@r is a tiny negative number
    x = np.where(x >= geom.periods, x - geom.periods, x)
    return x


def rational_independence_diagnostic(geom: ProjectionGeometry, bound: int):
    """Scan integer combinations of the rows of P for near-relations.

    Exhaustively enumerates nonzero integer vectors alpha with
    ||alpha||_inf <= bound and records the smallest ||sum_j alpha_j p_j||_2.
    A minimum below 1e-10 flags a (numerically) rational geometry.  This is
    a finite heuristic: it cannot certify irrationality.
    """
    if bound < 1:
        raise InvalidArgument("bound must be >= 1")
    n_rows = geom.d_high
    coeff_range = np.arange(-bound, bound + 1)
    # Enumerate alpha in blocks over the leading coefficient to bound memory.
    best_norm = np.inf
    best_alpha = None
    tail_axes = [coeff_range] * (n_rows - 1)
    tail = np.stack([m.ravel() for m in np.meshgrid(*tail_axes, indexing="ij")], axis=1)
    for a0 in coeff_range:
        alphas = np.concatenate(
            [np.full((tail.shape[0], 1), a0), tail], axis=1
        )
        nonzero = np.any(alphas != 0, axis=1)
        if not np.any(nonzero):
            continue
        alphas = alphas[nonzero]
        combos = alphas @ geom.P  # (M, d_low)
        norms = np.linalg.norm(combos, axis=1)
        i = int(np.argmin(norms))
        if norms[i] < best_norm:
            best_norm = float(norms[i])
            best_alpha = alphas[i].copy()
    flagged = best_norm < 1e-10
    return {
        "bound": int(bound),
        "min_combination_norm": best_norm,
        "alpha": [int(a) for a in best_alpha],
        "flagged": bool(flagged),
    }


@dataclass(frozen=True)
class PhysicalSamplingGrid:
    """Uniform physical validation grid with a one-point extension ring.

    Points are r0 + i*h for i in S(n) = {-n, ..., n}; reconstruction also
    fills the extended set S(n+1) so the cropped second-difference operator
    never needs boundary re-evaluation.
    """

    r0: np.ndarray
    h: float
    n: int
    d: int

    def __post_init__(self):
        r0 = np.asarray(self.r0, dtype=float).ravel()
        if self.d not in (1, 2):
            raise InvalidArgument("grid dimension must be 1 or 2")
        if r0.shape != (self.d,):
            raise InvalidArgument(f"origin must have length {self.d}")
        if self.h <= 0:
            raise InvalidArgument("mesh size h must be positive")
        if self.n < 1:
            raise InvalidArgument("half-width n must be >= 1")
        r0.setflags(write=False)
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "n", int(self.n))

    @property
    def n_inner(self) -> int:
        return (2 * self.n + 1) ** self.d

    @property
    def n_extended(self) -> int:
        return (2 * self.n + 3) ** self.d

    def axis(self, component: int, extended: bool = False) -> np.ndarray:
        w = self.n + 1 if extended else self.n
        return self.r0[component] + self.h * np.arange(-w, w + 1)

    def points(self, extended: bool = False) -> np.ndarray:
        """Sample points as an (count, d) array in C (row-major) order."""
        axes = [self.axis(c, extended) for c in range(self.d)]
        if self.d == 1:
            return axes[0][:, None]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
