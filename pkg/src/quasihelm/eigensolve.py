"""Solve the embedded generalized eigenvalue problem K U = lambda M U.

The smallest positive eigenvalues are extracted from the inverse problem
M U = mu K U with mu = 1/lambda.  Because K is diagonal, the inverse pencil
is symmetrized exactly: the iteration runs on the Hermitian operator
C = K^{-1/2} M K^{-1/2} restricted to the non-deflated modes, where the
largest eigenvalues of C are the wanted mu.  Small problems fall back to a
dense Hermitian solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure, EmptyPencil, InvalidArgument
from .lattice import FourierIndexSet
from .operator import MassOperator, StiffnessDiagonal

__all__ = [
    "SpectralEigenpair",
    "SolverConfig",
    "solve_embedded",
    "residual",
    "branch_overlap",
]

OVERSOLVE = 5  # extra Ritz pairs guarding the top of the mu spectrum


@dataclass(frozen=True)
class SpectralEigenpair:
    """Embedded eigenvalue with its Fourier eigenvector (||U||_2 = 1)."""

    lam: float
    U: np.ndarray = field(repr=False)
    k: np.ndarray
    residual: float

    def __post_init__(self):
        self.U.setflags(write=False)


@dataclass(frozen=True)
class SolverConfig:
    n_eig: int = 6
    tol: float = 1e-10
    max_iter: int = 5000
    seed: int = 0
    dense_threshold: int = 4096

    def __post_init__(self):
        if self.n_eig < 1:
            raise InvalidArgument("n_eig must be >= 1")
        if self.tol <= 0:
            raise InvalidArgument("tol must be positive")


def residual(pair: SpectralEigenpair, K: StiffnessDiagonal, M: MassOperator) -> float:
    """||(K U - lambda M U)|_active||_2 / ||U||_2, recomputed from scratch.

    Rows under the deflation mask are excluded because the pencil is solved
    on their complement.
    """
    r = K.values * pair.U - pair.lam * M.apply(pair.U)
    r = r[~K.mask]
    return float(np.linalg.norm(r) / np.linalg.norm(pair.U))


def solve_embedded(
    K: StiffnessDiagonal,
    M: MassOperator,
    cfg: SolverConfig,
    k: np.ndarray | None = None,
) -> list[SpectralEigenpair]:
    """The cfg.n_eig smallest positive embedded eigenvalues, ascending.

    Deterministic for a fixed seed: the Krylov start vector is drawn from a
    seeded generator and ARPACK's iteration is then reproducible.
    """
    if K.size != M.size:
        raise InvalidArgument("stiffness and mass sizes disagree")
    k = np.zeros(0) if k is None else np.asarray(k, dtype=float)
    active = ~K.mask
    n_active = int(np.sum(active))
    if n_active == 0:
        raise EmptyPencil("every Fourier mode was deflated")
    d_inv_sqrt = 1.0 / np.sqrt(K.values[active])
    n_request = min(cfg.n_eig + OVERSOLVE, n_active)

    if n_active < cfg.dense_threshold or n_request >= n_active - 1:
        mus, vecs = _dense_transformed(K, M, active, d_inv_sqrt)
        mus = mus[::-1][:n_request]
        vecs = vecs[:, ::-1][:, :n_request]
    else:
        mus, vecs = _iterative_transformed(
            K, M, active, d_inv_sqrt, n_request, cfg
        )

    pairs = []
    for j in range(mus.size):
        mu = float(mus[j])
        if mu <= 0:
            continue  # C is positive definite; discard numerically spurious Ritz values
        U = np.zeros(K.size, dtype=complex)
        U[active] = d_inv_sqrt * vecs[:, j]
        U /= np.linalg.norm(U)
        lam = 1.0 / mu
        res = float(np.linalg.norm((K.values * U - lam * M.apply(U))[active]))
        pairs.append(SpectralEigenpair(lam=lam, U=U, k=k, residual=res))
    pairs.sort(key=lambda p: p.lam)
    return pairs[: cfg.n_eig]


def _dense_transformed(K, M, active, d_inv_sqrt):
    act_pos = np.nonzero(active)[0]
    Md = M.dense(rows=act_pos, cols=act_pos)
    C = (d_inv_sqrt[:, None] * Md) * d_inv_sqrt[None, :]
    C = 0.5 * (C + C.conj().T)
    return sla.eigh(C)


def _iterative_transformed(K, M, active, d_inv_sqrt, n_request, cfg):
    n_active = d_inv_sqrt.size
    size = K.size
    act_pos = np.nonzero(active)[0]
    scratch = np.zeros(size, dtype=complex)

    def matvec(x):
        scratch[act_pos] = d_inv_sqrt * x
        out = M.apply(scratch)
        return d_inv_sqrt * out[act_pos]

    op = spla.LinearOperator((n_active, n_active), matvec=matvec, dtype=complex)
    rng = np.random.default_rng(cfg.seed)
    v0 = rng.standard_normal(n_active) + 1j * rng.standard_normal(n_active)
    try:
        mus, vecs = spla.eigsh(
            op,
            k=n_request,
            which="LA",
            v0=v0,
            tol=cfg.tol,
            maxiter=cfg.max_iter,
        )
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceFailure(
            f"ARPACK did not converge within {cfg.max_iter} iterations "
            f"({len(exc.eigenvalues)} of {n_request} Ritz pairs converged)",
            residuals=exc.eigenvalues,
        ) from exc
    order = np.argsort(mus)[::-1]
    return mus[order], vecs[:, order]


def branch_overlap(
    idx_a: FourierIndexSet,
    U_a: np.ndarray,
    idx_b: FourierIndexSet,
    U_b: np.ndarray,
) -> float:
    """|<U_a, U_b>| on the common multi-index range of two truncations.

    Used to continue an eigenvalue branch across different N.
    """
    if idx_a.d != idx_b.d:
        raise InvalidArgument("index sets have different dimensions")
    small, U_s, large, U_l = (
        (idx_a, U_a, idx_b, U_b) if idx_a.N <= idx_b.N else (idx_b, U_b, idx_a, U_a)
    )
    pos = large.positions(small.multi_indices)
    return float(abs(np.vdot(U_s, U_l[pos])))
