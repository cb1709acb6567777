"""Pointwise Rayleigh quotients against the cropped physical FD operators.

This is the mechanism that maps embedded eigenvalues back to the physical
problem: the reconstructed field is pushed through the cropped
second-difference operator, divided componentwise by the coefficient-scaled
field, and the resulting pointwise quotients are averaged under weights
proportional to eps_s |u_s|^2.  The weighted mean equals the cropped
Rayleigh quotient exactly, and its distance to the embedded eigenvalue is
the validation error e_RQ.

Complex convention: the reconstructed field is complex, so the weights use
|u|^2, the quotients stay complex, the estimator is the real part of the
weighted mean, and the imaginary magnitude is kept as a health diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import EmptyEstimator, InvalidArgument, InvalidCoefficient
from .lattice import PhysicalSamplingGrid
from .reconstruct import ReconstructedField

__all__ = [
    "FDOperatorPair",
    "PointwiseRQSet",
    "RQEstimate",
    "build_fd_pair",
    "pointwise_rqs",
    "weighted_expectation",
    "weighted_std",
    "rq_error",
    "estimate",
    "residual_bound_check",
]

DEFAULT_EXCLUSION = 1e-8


@dataclass(frozen=True)
class FDOperatorPair:
    """Cropped operators: A maps S(n+1) vectors to S(n), B is diagonal.

    1D: A is the (2n+1) x (2n+3) tridiagonal band with stencil (-1, 2, -1)/h^2.
    2D: A is the (2n+1)^2 x (2n+3)^2 five-point stencil (-1,-1,4,-1,-1)/h^2.
    Inner grids are vectorized in C (row-major) order.
    """

    dimension: int
    n: int
    h: float
    A: sp.csr_matrix = field(repr=False)
    eps: np.ndarray = field(repr=False)  # B-hat diagonal at inner points

    def __post_init__(self):
        self.eps.setflags(write=False)

    @property
    def B(self) -> sp.dia_matrix:
        return sp.diags(self.eps)

    def A_inner(self) -> sp.csr_matrix:
        """A restricted to inner columns (zero-padded ring), a square matrix."""
        inner_cols = _inner_column_positions(self.dimension, self.n)
        return self.A[:, inner_cols].tocsr()


def _inner_column_positions(dimension: int, n: int) -> np.ndarray:
    w = 2 * n + 3
    if dimension == 1:
        return np.arange(1, w - 1)
    i = np.arange(1, w - 1)
    return (i[:, None] * w + i[None, :]).ravel()


def build_fd_pair(
    grid: PhysicalSamplingGrid, eps_inner: np.ndarray, dimension: int | None = None
) -> FDOperatorPair:
    """Assemble the cropped second-difference pair on a sampling grid."""
    dimension = grid.d if dimension is None else dimension
    if dimension != grid.d:
        raise InvalidArgument("dimension disagrees with the sampling grid")
    eps_inner = np.asarray(eps_inner, dtype=float).ravel()
    if eps_inner.size != grid.n_inner:
        raise InvalidArgument(
            f"need {grid.n_inner} coefficient samples, got {eps_inner.size}"
        )
    if np.any(eps_inner <= 0):
        raise InvalidCoefficient("validation coefficient must be strictly positive")
    n, h = grid.n, grid.h
    m = 2 * n + 1
    if dimension == 1:
        rows = np.repeat(np.arange(m), 3)
        cols = (np.arange(m)[:, None] + np.array([0, 1, 2])[None, :]).ravel()
        vals = np.tile(np.array([-1.0, 2.0, -1.0]) / h**2, m)
        A = sp.csr_matrix((vals, (rows, cols)), shape=(m, m + 2))
    else:
        w = m + 2
        ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        row = (ii * m + jj).ravel()
        ci, cj = ii.ravel() + 1, jj.ravel() + 1  # extended-grid center
        offsets = [(0, 0, 4.0), (-1, 0, -1.0), (1, 0, -1.0), (0, -1, -1.0), (0, 1, -1.0)]
        rows, cols, vals = [], [], []
        for di, dj, v in offsets:
            rows.append(row)
            cols.append((ci + di) * w + (cj + dj))
            vals.append(np.full(row.size, v / h**2))
        A = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(m * m, w * w),
        )
    return FDOperatorPair(dimension=dimension, n=n, h=h, A=A, eps=eps_inner)


@dataclass(frozen=True)
class PointwiseRQSet:
    """Pointwise quotients with their probability weights.

    Arrays are defined over all inner samples; ``included`` marks the ones
    that survive the amplitude exclusion.  Weights are normalized over the
    included set only.
    """

    quotients: np.ndarray = field(repr=False)  # complex, nan where excluded
    weights: np.ndarray = field(repr=False)  # real, 0 where excluded
    included: np.ndarray = field(repr=False)  # bool
    u_inner: np.ndarray = field(repr=False)
    Au: np.ndarray = field(repr=False)
    eps: np.ndarray = field(repr=False)
    delta: float

    @property
    def n_samples(self) -> int:
        return int(self.included.size)

    @property
    def n_included(self) -> int:
        return int(np.sum(self.included))

    @property
    def n_excluded(self) -> int:
        return self.n_samples - self.n_included


def pointwise_rqs(
    fld: ReconstructedField, pair: FDOperatorPair, delta: float = DEFAULT_EXCLUSION
) -> PointwiseRQSet:
    """r_s = (A u_ext)_s / (B u_inner)_s with weights p_s ~ eps_s |u_s|^2.

    Samples with |u_s| < delta * max|u| are excluded from both the quotient
    set and the weight normalization.
    """
    if fld.grid.n != pair.n or fld.grid.d != pair.dimension:
        raise InvalidArgument("field grid disagrees with the operator grid")
    u_ext = fld.values.reshape(-1)
    u_inner = fld.inner().reshape(-1)
    Au = pair.A @ u_ext
    amp = np.abs(u_inner)
    included = amp >= delta * amp.max()
    if not np.any(included):
        raise EmptyEstimator("all samples fell below the exclusion threshold")
    quotients = np.full(u_inner.size, np.nan + 0j, dtype=complex)
    quotients[included] = Au[included] / (pair.eps[included] * u_inner[included])
    raw = np.where(included, pair.eps * amp**2, 0.0)
    weights = raw / raw.sum()
    return PointwiseRQSet(
        quotients=quotients,
        weights=weights,
        included=included,
        u_inner=u_inner,
        Au=Au,
        eps=pair.eps,
        delta=float(delta),
    )


def weighted_expectation(rq: PointwiseRQSet) -> complex:
    """Weighted mean of the pointwise quotients (complex).

    Algebraically equal to the cropped Rayleigh quotient
    <u_inner, A u_ext> / <u_inner, B u_inner> restricted to the included
    samples; the estimator lambda-hat is its real part.
    """
    inc = rq.included
    return complex(np.sum(rq.weights[inc] * rq.quotients[inc]))


def weighted_std(rq: PointwiseRQSet, lambda_hat: float) -> float:
    inc = rq.included
    return float(np.sqrt(np.sum(rq.weights[inc] * np.abs(rq.quotients[inc] - lambda_hat) ** 2)))


def rq_error(lambda_hat: float, lambda_tilde: float) -> float:
    return abs(lambda_hat - lambda_tilde)


@dataclass(frozen=True)
class RQEstimate:
    """Weighted validation summary for a single branch."""

    lambda_hat: float
    sigma_rq: float
    e_rq: float
    n_samples: int
    n_excluded: int
    imag_diag: float

    def as_record(self) -> dict:
        return {
            "lambda_hat": self.lambda_hat,
            "sigma_rq": self.sigma_rq,
            "e_rq": self.e_rq,
            "n_samples": self.n_samples,
            "n_excluded": self.n_excluded,
            "imag_diag": self.imag_diag,
        }


def estimate(rq: PointwiseRQSet, lambda_tilde: float) -> RQEstimate:
    mean = weighted_expectation(rq)
    lam_hat = float(mean.real)
    return RQEstimate(
        lambda_hat=lam_hat,
        sigma_rq=weighted_std(rq, lam_hat),
        e_rq=rq_error(lam_hat, lambda_tilde),
        n_samples=rq.n_samples,
        n_excluded=rq.n_excluded,
        imag_diag=abs(mean.imag),
    )


def residual_bound_check(rq: PointwiseRQSet, lambda_tilde: float) -> dict:
    """Residual-driven bias bound on the included samples.

    Evaluates e_s = (A u)_s - lambda (B u)_s and checks the chain
    |lambda_hat - lambda| <= sum p_s |e_s/(eps_s u_s)| <= C e_max with the
    data-computed constant C = sum|u_s| / sum eps_s |u_s|^2.
    """
    inc = rq.included
    e = rq.Au - lambda_tilde * rq.eps * rq.u_inner
    e_max = float(np.max(np.abs(e[inc])))
    weighted_mean = float(
        np.sum(rq.weights[inc] * np.abs(e[inc] / (rq.eps[inc] * rq.u_inner[inc])))
    )
    amp = np.abs(rq.u_inner[inc])
    C = float(np.sum(amp) / np.sum(rq.eps[inc] * amp**2))
    lam_hat = float(weighted_expectation(rq).real)
    gap = abs(lam_hat - lambda_tilde)
    slack = 1e-12 * max(1.0, abs(lambda_tilde), weighted_mean)
    return {
        "lambda_hat": lam_hat,
        "lambda_tilde": lambda_tilde,
        "bias": gap,
        "weighted_mean": weighted_mean,
        "e_max": e_max,
        "C": C,
        "bound_product": C * e_max,
        "first_inequality": bool(gap <= weighted_mean + slack),
        "second_inequality": bool(weighted_mean <= C * e_max + slack),
        "holds": bool(
            gap <= weighted_mean + slack and weighted_mean <= C * e_max + slack
        ),
    }
