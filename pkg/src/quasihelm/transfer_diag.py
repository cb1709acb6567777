"""Transfer-matrix diagnostics for the local ratio recurrence.

The three-term relation u_{i+1} = s_i u_i - u_{i-1} behind each pointwise
quotient is encoded by the scalar symplectic pair
M = [[a, 0], [t, -1]], L = [[-s, 1], [a, 0]], whose projective action drives
the neighbor ratios y_i = u_{i+1}/u_i.  Consecutive pairs coalesce into a
single pair without forming the matrix product, which is the numerically
stable way to study long chains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NearSingularCoalesce

__all__ = [
    "ScalarSymplecticPair",
    "RatioSequence",
    "coalesce",
    "coalesce_chain",
    "recurrence_pairs",
    "ratio_sequence_from_field",
    "ratio_sequence_from_recurrence",
    "stability_report",
    "five_point_split",
]

COALESCE_FLOOR = 1e-12


@dataclass(frozen=True)
class ScalarSymplecticPair:
    a: float
    s: float
    t: float

    def M(self) -> np.ndarray:
        return np.array([[self.a, 0.0], [self.t, -1.0]])

    def L(self) -> np.ndarray:
        return np.array([[-self.s, 1.0], [self.a, 0.0]])

    def transfer(self, floor: float = COALESCE_FLOOR) -> np.ndarray:
        """The 2x2 map L^{-1} M; requires |a| above the inversion floor."""
        if abs(self.a) < floor:
            raise InvalidArgument(f"pair not invertible: |a| = {abs(self.a):.3e}")
        a, s, t = self.a, self.s, self.t
        return np.array([[t / a, -1.0 / a], [a + s * t / a, -s / a]])


def coalesce(
    first: ScalarSymplecticPair,
    second: ScalarSymplecticPair,
    floor: float = COALESCE_FLOOR,
) -> ScalarSymplecticPair:
    """Combine two pairs so the result's transfer map is second o first."""
    pivot = second.t - first.s
    if abs(pivot) < floor:
        raise NearSingularCoalesce(f"|t2 - s1| = {abs(pivot):.3e} below floor {floor:g}")
    return ScalarSymplecticPair(
        a=second.a * first.a / pivot,
        s=second.s + second.a**2 / pivot,
        t=first.t - first.a**2 / pivot,
    )


def coalesce_chain(
    pairs: list[ScalarSymplecticPair], floor: float = COALESCE_FLOOR
) -> ScalarSymplecticPair:
    """Left-to-right coalescing of a chain (pairs applied in list order)."""
    if not pairs:
        raise InvalidArgument("empty chain")
    acc = pairs[0]
    for nxt in pairs[1:]:
        acc = coalesce(acc, nxt, floor=floor)
    return acc


def recurrence_pairs(s_values: np.ndarray) -> list[ScalarSymplecticPair]:
    """Pairs (a=1, t=0) realizing y_i = s_i - 1/y_{i-1}."""
    return [ScalarSymplecticPair(a=1.0, s=float(s), t=0.0) for s in np.asarray(s_values)]


@dataclass(frozen=True)
class RatioSequence:
    """Neighbor ratios y_i = u_{i+1}/u_i, nan where a zero crossing splits it."""

    ratios: np.ndarray
    valid: np.ndarray
    source: str

    @property
    def n_gaps(self) -> int:
        return int(np.sum(~self.valid))


def ratio_sequence_from_field(
    u: np.ndarray, axis: int = 0, floor_rel: float = 1e-12
) -> RatioSequence:
    """Direct-division ratios along one axis of a sampled field.

    For 2D fields, axis 0 yields the row-wise sequence u_{i+1,j}/u_{i,j} and
    axis 1 the column-wise one.
    """
    u = np.asarray(u)
    if axis >= u.ndim:
        raise InvalidArgument(f"axis {axis} out of range for ndim {u.ndim}")
    lo = np.take(u, np.arange(u.shape[axis] - 1), axis=axis)
    hi = np.take(u, np.arange(1, u.shape[axis]), axis=axis)
    floor = floor_rel * np.max(np.abs(u))
    valid = (np.abs(lo) >= floor) & (np.abs(hi) >= floor)
    ratios = np.full(lo.shape, np.nan + 0j, dtype=complex)
    np.divide(hi, lo, out=ratios, where=valid)
    return RatioSequence(ratios=ratios, valid=valid, source="field")


def ratio_sequence_from_recurrence(s_values: np.ndarray, y0: complex) -> RatioSequence:
    """Ratios generated by y_i = s_i - 1/y_{i-1} from the seed y0."""
    s_values = np.asarray(s_values)
    out = np.empty(s_values.size, dtype=complex)
    y = complex(y0)
    for i, s in enumerate(s_values):
        y = s - 1.0 / y
        out[i] = y
    return RatioSequence(ratios=out, valid=np.isfinite(out), source="recurrence")


def stability_report(
    coalesced: ScalarSymplecticPair, u1: float, eta: float | None = None
) -> dict:
    """Regime classification and terminal-ratio prediction for a chain.

    The prediction u_n/u_{n+1} = s + a^2 u1/(t u1 - 1) applies to the chain
    started from the vector (u1, 1); it degenerates when t*u1 is too close
    to 1.  Regimes compare |s|, |t| against the scales {eta, 1, 1/eta} on a
    log axis, with "same order" meaning within a factor of 10.
    """
    a, s, t = coalesced.a, coalesced.s, coalesced.t
    scale = max(abs(a), abs(s), abs(t), 1.0)
    if eta is None:
        eta = np.sqrt(np.finfo(float).eps) * scale
    small_a = abs(a) <= eta
    mags = [m for m in (abs(s), abs(t)) if m > 0]
    same_order = (
        len(mags) == 2 and max(mags) <= 10.0 * min(mags)
    )
    regime = None
    if same_order:
        m = float(np.sqrt(abs(s) * abs(t)))
        candidates = {"O(eta)": eta, "O(1)": 1.0, "O(1/eta)": 1.0 / eta}
        regime = min(candidates, key=lambda key: abs(np.log10(m / candidates[key])))
    denom = t * u1 - 1.0
    degenerate = abs(denom) < 1e-12 * max(1.0, abs(t * u1))
    predicted = None if degenerate else s + a**2 * u1 / denom
    return {
        "a": a,
        "s": s,
        "t": t,
        "eta": float(eta),
        "small_a": bool(small_a),
        "same_order": bool(same_order),
        "regime": regime,
        "degenerate": bool(degenerate),
        "predicted_ratio": predicted,
        "ratio_O1": bool(
            predicted is not None and 0.1 <= abs(predicted) <= 10.0
        ),
    }


def five_point_split(u: np.ndarray, s: np.ndarray) -> dict:
    """Row/column split of the five-point relation 2 s_ij u_ij = neighbors.

    Returns the row and column recurrence values
    row = y_ij + 1/y_{i-1,j} and col = z_ij + 1/z_{i,j-1} on the interior,
    together with the residual of their sum against 2 s_ij.  The individual
    recurrences carry the split; only their sum is pinned by the five-point
    relation itself.
    """
    u = np.asarray(u)
    s = np.asarray(s)
    if u.ndim != 2 or u.shape != s.shape:
        raise InvalidArgument("need matching 2D arrays")
    y = ratio_sequence_from_field(u, axis=0).ratios  # (m-1, n): u[i+1,j]/u[i,j]
    z = ratio_sequence_from_field(u, axis=1).ratios  # (m, n-1)
    row = y[1:, 1:-1] + 1.0 / y[:-1, 1:-1]
    col = z[1:-1, 1:] + 1.0 / z[1:-1, :-1]
    s_in = s[1:-1, 1:-1]
    residual = row + col - 2.0 * s_in
    return {"row": row, "col": col, "sum_residual": residual}
