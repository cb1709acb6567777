"""Periodic lifted coefficients and their Fourier-space representations.

Coefficients live on the high-dimensional torus and are strictly positive.
The catalog is deliberately closed: trigonometric polynomials, exponentials
of trigonometric polynomials, sharp two-phase level-set coefficients, and
their tanh-smoothed variants.  Each entry evaluates vectorized over arrays
of torus points with shape (..., d).
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import InvalidArgument, InvalidCoefficient
from .lattice import FourierIndexSet, ProjectionGeometry, build_index_set

__all__ = [
    "PeriodicCoefficient",
    "TrigPolynomial",
    "FourierPolyCoefficient",
    "ExpTrigCoefficient",
    "TwoPhaseCoefficient",
    "TanhSmoothedCoefficient",
    "FourierCoefficientGrid",
    "ShellSpectrum",
    "sample_to_fourier",
    "tanh_smooth",
    "shell_rms",
    "coefficient_from_config",
    "dump_grid",
    "load_grid",
]


class PeriodicCoefficient:
    """Base class: a strictly positive T-periodic function on the torus."""

    d: int
    periods: np.ndarray
    is_real: bool = True

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def on_physical(self, geom: ProjectionGeometry, r: np.ndarray) -> np.ndarray:
        """Quasiperiodic restriction eps(r) = E(P r).

        Accepts points of shape (..., d_low); 1D geometries also accept bare
        scalars or (M,) arrays.
        """
        r = np.asarray(r, dtype=float)
        if geom.d_low == 1 and (r.ndim == 0 or r.shape[-1] != 1):
            r = r[..., None]
        return self.evaluate(r @ geom.P.T)


@dataclass(frozen=True)
class TrigPolynomial:
    """Real trigonometric polynomial sum_t a_t cos(xi_t.x) + b_t sin(xi_t.x).

    Modes are integer vectors in lattice units; the actual frequency of mode
    m is 2*pi*m/T componentwise.
    """

    periods: np.ndarray
    cos_modes: np.ndarray  # (n_cos, d) int
    cos_amps: np.ndarray
    sin_modes: np.ndarray  # (n_sin, d) int
    sin_amps: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        periods = np.asarray(self.periods, dtype=float).ravel()
        d = periods.size
        cm = np.asarray(self.cos_modes, dtype=int).reshape(-1, d)
        sm = np.asarray(self.sin_modes, dtype=int).reshape(-1, d)
        ca = np.asarray(self.cos_amps, dtype=float).ravel()
        sa = np.asarray(self.sin_amps, dtype=float).ravel()
        if ca.size != cm.shape[0] or sa.size != sm.shape[0]:
            raise InvalidArgument("amplitude/mode count mismatch")
        for arr in (periods, cm, sm, ca, sa):
            arr.setflags(write=False)
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "cos_modes", cm)
        object.__setattr__(self, "sin_modes", sm)
        object.__setattr__(self, "cos_amps", ca)
        object.__setattr__(self, "sin_amps", sa)

    @property
    def d(self) -> int:
        return self.periods.size

    def _phases(self, modes: np.ndarray, x: np.ndarray) -> np.ndarray:
        freqs = modes * (2 * np.pi / self.periods)[None, :]
        return np.tensordot(x, freqs, axes=([-1], [1]))  # (..., n_modes)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape[:-1], self.offset, dtype=float)
        if self.cos_amps.size:
            out = out + np.cos(self._phases(self.cos_modes, x)) @ self.cos_amps
        if self.sin_amps.size:
            out = out + np.sin(self._phases(self.sin_modes, x)) @ self.sin_amps
        return out

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Analytic gradient, shape (..., d)."""
        x = np.asarray(x, dtype=float)
        grad = np.zeros(x.shape, dtype=float)
        if self.cos_amps.size:
            freqs = self.cos_modes * (2 * np.pi / self.periods)[None, :]
            s = np.sin(self._phases(self.cos_modes, x)) * self.cos_amps
            grad = grad - s @ freqs
        if self.sin_amps.size:
            freqs = self.sin_modes * (2 * np.pi / self.periods)[None, :]
            c = np.cos(self._phases(self.sin_modes, x)) * self.sin_amps
            grad = grad + c @ freqs
        return grad


@dataclass(frozen=True)
class FourierPolyCoefficient(PeriodicCoefficient):
    """Trigonometric-polynomial coefficient (includes constants)."""

    poly: TrigPolynomial

    @property
    def d(self) -> int:
        return self.poly.d

    @property
    def periods(self) -> np.ndarray:
        return self.poly.periods

    def evaluate(self, x):
        return self.poly.evaluate(x)


@dataclass(frozen=True)
class ExpTrigCoefficient(PeriodicCoefficient):
    """offset + exp(poly_exp(x)) + poly_add(x)."""

    offset: float
    exponent: TrigPolynomial
    additive: TrigPolynomial

    @property
    def d(self) -> int:
        return self.exponent.d

    @property
    def periods(self) -> np.ndarray:
        return self.exponent.periods

    def evaluate(self, x):
        return self.offset + np.exp(self.exponent.evaluate(x)) + self.additive.evaluate(x)


@dataclass(frozen=True)
class TwoPhaseCoefficient(PeriodicCoefficient):
    """Sharp two-phase coefficient: eps_inside where level(x) > threshold."""

    level: TrigPolynomial
    threshold: float
    eps_inside: float
    eps_outside: float

    def __post_init__(self):
        if self.eps_inside <= 0 or self.eps_outside <= 0:
            raise InvalidCoefficient("phase values must be strictly positive")

    @property
    def d(self) -> int:
        return self.level.d

    @property
    def periods(self) -> np.ndarray:
        return self.level.periods

    def evaluate(self, x):
        phi = self.level.evaluate(x)
        return np.where(phi > self.threshold, self.eps_inside, self.eps_outside)

    def signed_distance(self, x) -> np.ndarray:
        """First-order level-set normalization (phi - c)/|grad phi|.

        Falls back to the raw offset phi - c where the gradient degenerates;
        such points are reported once through the warnings machinery.
        """
        phi = self.level.evaluate(x) - self.threshold
        grad = self.level.gradient(x)
        gnorm = np.linalg.norm(grad, axis=-1)
        degenerate = gnorm < 1e-12
        if np.any(degenerate):
            warnings.warn(
                f"level-set gradient degenerate at {int(np.sum(degenerate))} sample(s); "
                "using raw level offset there",
                RuntimeWarning,
                stacklevel=2,
            )
        safe = np.where(degenerate, 1.0, gnorm)
        return np.where(degenerate, phi, phi / safe)


@dataclass(frozen=True)
class TanhSmoothedCoefficient(PeriodicCoefficient):
    """Tanh mollification of a two-phase coefficient with width tau."""

    sharp: TwoPhaseCoefficient
    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise InvalidArgument("smoothing width tau must be positive")

    @property
    def d(self) -> int:
        return self.sharp.d

    @property
    def periods(self) -> np.ndarray:
        return self.sharp.periods

    def evaluate(self, x):
        a, b = self.sharp.eps_outside, self.sharp.eps_inside
        dist = self.sharp.signed_distance(x)
        return 0.5 * (a + b) + 0.5 * (b - a) * np.tanh(dist / self.tau)


def tanh_smooth(coeff: TwoPhaseCoefficient, tau: float) -> TanhSmoothedCoefficient:
    """Smooth a sharp two-phase coefficient with a tanh profile of width tau."""
    if not isinstance(coeff, TwoPhaseCoefficient):
        raise InvalidArgument("tanh_smooth expects a two-phase coefficient")
    return TanhSmoothedCoefficient(sharp=coeff, tau=float(tau))


@dataclass(frozen=True)
class FourierCoefficientGrid:
    """Fourier coefficients E_xi on the truncated lattice.

    ``coeffs`` is the (2N,)*d complex tensor in lattice order (integer index
    i_m ascending from -N to N-1 along each axis); its C-order ravel matches
    the FourierIndexSet enumeration.
    """

    N: int
    periods: np.ndarray
    coeffs: np.ndarray = field(repr=False)
    is_real: bool = True

    @property
    def d(self) -> int:
        return self.periods.size

    @property
    def size(self) -> int:
        return self.coeffs.size

    def vector(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def mean_value(self) -> complex:
        """E_0, the torus average of the sampled coefficient."""
        return complex(self.coeffs[(self.N,) * self.d])

    def index_set(self) -> FourierIndexSet:
        return build_index_set(self.N, self.periods)


def _conjugate_reverse(bins: np.ndarray) -> np.ndarray:
    """conj(E[-j mod 2N]) for every FFT bin j."""
    out = np.conj(bins)
    for ax in range(bins.ndim):
        out = np.flip(out, axis=ax)
        out = np.roll(out, 1, axis=ax)
    return out


def _probe_failure_point(coeff: PeriodicCoefficient, mesh_axes) -> str:
    # Re-evaluate pointwise to locate the first failing torus point.
    grids = np.meshgrid(*mesh_axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    for p in pts[: min(len(pts), 4096)]:
        try:
            coeff.evaluate(p)
        except Exception:
            return np.array2string(p, precision=6)
    return "unknown"


def sample_to_fourier(
    coeff: PeriodicCoefficient,
    N: int,
    geom: ProjectionGeometry | None = None,
    oversample: int = 1,
) -> FourierCoefficientGrid:
    """Pseudospectral Fourier coefficients of a torus coefficient.

    Samples on the uniform tensor grid of 2N*oversample points per axis,
    applies the normalized forward DFT, keeps the modes with index in
    [-N, N-1], and reorders to lattice convention.  For real coefficients
    Hermitian symmetry is enforced by averaging conjugate bin pairs.
    """
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    if oversample < 1:
        raise InvalidArgument("oversample must be >= 1")
    periods = geom.periods if geom is not None else coeff.periods
    periods = np.asarray(periods, dtype=float)
    d = periods.size
    M = 2 * N * oversample
    axes = [periods[m] * np.arange(M) / M for m in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1)
    try:
        samples = np.asarray(coeff.evaluate(pts))
    except Exception as exc:
        point = _probe_failure_point(coeff, axes)
        raise InvalidCoefficient(
            f"coefficient evaluation failed near torus point {point}"
        ) from exc
    if samples.shape != (M,) * d:
        raise InvalidCoefficient(
            f"coefficient returned shape {samples.shape}, expected {(M,) * d}"
        )
    bins = sfft.fftn(samples.astype(complex)) / samples.size
    if coeff.is_real:
        bins = 0.5 * (bins + _conjugate_reverse(bins))
    if oversample > 1:
        keep = np.r_[0 : N, M - N : M]
        for ax in range(d):
            bins = np.take(bins, keep, axis=ax)
    lattice = sfft.fftshift(bins)
    lattice.setflags(write=False)
    return FourierCoefficientGrid(
        N=int(N), periods=periods.copy(), coeffs=lattice, is_real=coeff.is_real
    )


@dataclass(frozen=True)
class ShellSpectrum:
    """Shell-wise RMS Fourier amplitudes over ||i||_inf = q, q = 0..N."""

    N: int
    amplitudes: np.ndarray  # (N+1,)
    counts: np.ndarray  # (N+1,) int

    def __post_init__(self):
        if np.any(self.amplitudes < 0):
            raise InvalidArgument("shell amplitudes must be non-negative")


def shell_rms(grid: FourierCoefficientGrid) -> ShellSpectrum:
    """RMS |E_xi| per sup-norm shell of the integer index."""
    N, d = grid.N, grid.d
    mags = np.abs(np.arange(-N, N))
    shell = mags
    for _ in range(d - 1):
        shell = np.maximum.outer(shell, mags)
    power = np.abs(grid.coeffs) ** 2
    amps = np.zeros(N + 1)
    counts = np.zeros(N + 1, dtype=int)
    flat_shell = shell.reshape(-1)
    flat_power = power.reshape(-1)
    counts = np.bincount(flat_shell, minlength=N + 1)
    sums = np.bincount(flat_shell, weights=flat_power, minlength=N + 1)
    amps = np.sqrt(sums / np.maximum(counts, 1))
    return ShellSpectrum(N=N, amplitudes=amps, counts=counts)


_GRID_MAGIC = b"QHFCGRID"


def dump_grid(grid: FourierCoefficientGrid, path) -> None:
    """Binary sidecar: magic, N, d (int64 LE), periods, then complex values.

    Values are little-endian float64 pairs (real part first) in lattice
    order.  The same container is used for eigenvector sidecars.
    """
    coeffs = grid.vector()
    with open(path, "wb") as fh:
        fh.write(_GRID_MAGIC)
        fh.write(struct.pack("<qq", grid.N, grid.d))
        fh.write(np.asarray(grid.periods, dtype="<f8").tobytes())
        inter = np.empty(2 * coeffs.size, dtype="<f8")
        inter[0::2] = coeffs.real
        inter[1::2] = coeffs.imag
        fh.write(inter.tobytes())


def load_grid(path) -> FourierCoefficientGrid:
    """Read a binary sidecar written by :func:`dump_grid`."""
    with open(path, "rb") as fh:
        magic = fh.read(len(_GRID_MAGIC))
        if magic != _GRID_MAGIC:
            raise InvalidArgument(f"{path}: not a coefficient-grid sidecar")
        N, d = struct.unpack("<qq", fh.read(16))
        periods = np.frombuffer(fh.read(8 * d), dtype="<f8").copy()
        payload = np.frombuffer(fh.read(), dtype="<f8")
    expected = 2 * (2 * N) ** d
    if payload.size != expected:
        raise InvalidArgument(f"{path}: truncated payload")
    coeffs = (payload[0::2] + 1j * payload[1::2]).reshape((2 * N,) * d)
    sym_err = np.max(np.abs(sfft.ifftshift(coeffs) - _conjugate_reverse(sfft.ifftshift(coeffs))))
    scale = max(np.max(np.abs(coeffs)), 1e-300)
    return FourierCoefficientGrid(
        N=int(N), periods=periods, coeffs=coeffs, is_real=bool(sym_err <= 1e-12 * scale)
    )


def _poly_from_config(spec: dict, periods) -> TrigPolynomial:
    cos_terms = spec.get("cosines", [])
    sin_terms = spec.get("sines", [])
    d = np.asarray(periods).size
    cm = np.array([t["modes"] for t in cos_terms], dtype=int).reshape(-1, d)
    sm = np.array([t["modes"] for t in sin_terms], dtype=int).reshape(-1, d)
    ca = np.array([t["amp"] for t in cos_terms], dtype=float)
    sa = np.array([t["amp"] for t in sin_terms], dtype=float)
    return TrigPolynomial(
        periods=periods,
        cos_modes=cm,
        cos_amps=ca,
        sin_modes=sm,
        sin_amps=sa,
        offset=float(spec.get("offset", 0.0)),
    )


def coefficient_from_config(spec: dict, periods) -> PeriodicCoefficient:
    """Build a catalog coefficient from its config-file description."""
    kind = spec.get("kind")
    if kind == "constant":
        value = float(spec["value"])
        if value <= 0:
            raise InvalidCoefficient("constant coefficient must be positive")
        poly = _poly_from_config({"offset": value}, periods)
        return FourierPolyCoefficient(poly=poly)
    if kind == "fourier-poly":
        return FourierPolyCoefficient(poly=_poly_from_config(spec, periods))
    if kind == "exp-trig":
        exponent = _poly_from_config(spec.get("exp", {}), periods)
        additive = _poly_from_config(spec.get("add", {}), periods)
        return ExpTrigCoefficient(
            offset=float(spec.get("offset", 0.0)), exponent=exponent, additive=additive
        )
    if kind == "two-phase":
        return TwoPhaseCoefficient(
            level=_poly_from_config(spec["level"], periods),
            threshold=float(spec["threshold"]),
            eps_inside=float(spec["eps_inside"]),
            eps_outside=float(spec["eps_outside"]),
        )
    if kind == "tanh-two-phase":
        sharp = TwoPhaseCoefficient(
            level=_poly_from_config(spec["level"], periods),
            threshold=float(spec["threshold"]),
            eps_inside=float(spec["eps_inside"]),
            eps_outside=float(spec["eps_outside"]),
        )
        return TanhSmoothedCoefficient(sharp=sharp, tau=float(spec["tau"]))
    raise InvalidArgument(f"unknown coefficient kind {kind!r}")
