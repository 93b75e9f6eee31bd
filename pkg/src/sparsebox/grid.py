"""Periodic 3-component fields on a uniform cube with a synchronized spectral form.

Collocation points are x_i = i*L/n (i = 0..n-1) on every axis; all quadrature
is the rectangle rule, which is spectrally accurate for periodic integrands.
Fields are immutable after construction: every operation returns a new field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as _fft

DEFAULT_K_MAX = 12


class FieldError(ValueError):
    """Base error for field construction and field operations."""


class NonFiniteFieldError(FieldError):
    """A field contains NaN/Inf values.

    For derivative results this carries the offending multi-index, since
    high orders amplify round-off by kappa^k.
    """

    def __init__(self, message, orders=None):
        super().__init__(message)
        self.orders = orders


class DerivativeOrderError(FieldError):
    """Requested derivative order exceeds the configured maximum."""


@dataclass(frozen=True)
class MultiIndex:
    """Per-axis derivative orders (zeta1, zeta2, zeta3)."""

    orders: tuple[int, int, int]

    def __post_init__(self):
        if len(self.orders) != 3 or any(int(o) != o or o < 0 for o in self.orders):
            raise FieldError(f"multi-index must be 3 non-negative integers, got {self.orders}")
        object.__setattr__(self, "orders", tuple(int(o) for o in self.orders))

    @property
    def total(self) -> int:
        return sum(self.orders)

    @classmethod
    def along_axis(cls, k: int, axis: int = 0) -> "MultiIndex":
        orders = [0, 0, 0]
        orders[axis] = int(k)
        return cls(tuple(orders))


def multi_indices(order: int):
    """All multi-indices (a, b, c) with a+b+c == order, lexicographic."""
    out = []
    for a in range(order, -1, -1):
        for b in range(order - a, -1, -1):
            out.append(MultiIndex((a, b, order - a - b)))
    return out


@dataclass(frozen=True)
class SpectralFilter:
    """Exponential high-k filter exp(-a (|k|/k_nyq)^(2m)); OFF by default."""

    amplitude: float = 36.0
    order: int = 8


class Grid:
    """Wavenumber bookkeeping for an n^3 periodic box of side ``length``."""

    def __init__(self, n: int, length: float = 2.0 * math.pi):
        if n < 8 or (n & (n - 1)) != 0:
            raise FieldError(f"grid size must be a power of two with n >= 8, got n={n}")
        self.n = int(n)
        self.length = float(length)
        self.h = self.length / self.n
        self.x = np.arange(self.n) * self.h
        scale = 2.0 * math.pi / self.length
        k_full = np.fft.fftfreq(self.n, d=1.0 / self.n) * scale
        k_half = np.fft.rfftfreq(self.n, d=1.0 / self.n) * scale
        self.kx = k_full.reshape(-1, 1, 1)
        self.ky = k_full.reshape(1, -1, 1)
        self.kz = k_half.reshape(1, 1, -1)
        self.k_sq = self.kx**2 + self.ky**2 + self.kz**2
        self.k_nyquist = scale * (self.n // 2)
        # 2/3-rule mask on integer wavenumbers, per axis.
        cut = self.n // 3
        keep = np.abs(np.fft.fftfreq(self.n, d=1.0 / self.n)) <= cut
        keep_half = np.abs(np.fft.rfftfreq(self.n, d=1.0 / self.n)) <= cut
        self.dealias_mask = (
            keep.reshape(-1, 1, 1) & keep.reshape(1, -1, 1) & keep_half.reshape(1, 1, -1)
        )

    def meshgrid(self):
        return np.meshgrid(self.x, self.x, self.x, indexing="ij")

    def spectral_shape(self):
        return (3, self.n, self.n, self.n // 2 + 1)

    def __repr__(self):
        return f"Grid(n={self.n}, length={self.length})"

    def __eq__(self, other):
        return isinstance(other, Grid) and self.n == other.n and self.length == other.length

    def __hash__(self):
        return hash((self.n, self.length))


@lru_cache(maxsize=16)
def grid_for(n: int, length: float = 2.0 * math.pi) -> Grid:
    """Shared Grid instances so wavenumber arrays are built once per size."""
    return Grid(n, length)


class PeriodicField:
    """Real 3-component field with a lazily cached spectral representation."""

    __slots__ = ("grid", "data", "_spectral")

    def __init__(self, grid: Grid, data: np.ndarray, spectral: np.ndarray | None = None):
        data = np.asarray(data, dtype=np.float64)
        if data.shape != (3, grid.n, grid.n, grid.n):
            raise FieldError(f"component array shape {data.shape} does not match grid n={grid.n}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteFieldError("field contains non-finite values")
        data = data.copy()
        data.flags.writeable = False
        self.grid = grid
        self.data = data
        self._spectral = spectral

    @classmethod
    def from_components(cls, grid: Grid, u1, u2, u3) -> "PeriodicField":
        return cls(grid, np.stack([u1, u2, u3]))

    @classmethod
    def from_spectral(cls, grid: Grid, spec: np.ndarray) -> "PeriodicField":
        data = _fft.irfftn(spec, s=(grid.n,) * 3, axes=(1, 2, 3))
        if not np.all(np.isfinite(data)):
            raise NonFiniteFieldError("inverse transform produced non-finite values")
        return cls(grid, data, spectral=np.asarray(spec, dtype=np.complex128))

    @classmethod
    def zeros(cls, grid: Grid) -> "PeriodicField":
        return cls(grid, np.zeros((3, grid.n, grid.n, grid.n)))

    @property
    def spectral(self) -> np.ndarray:
        if self._spectral is None:
            self._spectral = _fft.rfftn(self.data, axes=(1, 2, 3))
        return self._spectral

    def component(self, i: int) -> np.ndarray:
        return self.data[i]

    def __add__(self, other: "PeriodicField") -> "PeriodicField":
        return PeriodicField(self.grid, self.data + other.data)

    def __sub__(self, other: "PeriodicField") -> "PeriodicField":
        return PeriodicField(self.grid, self.data - other.data)

    def __mul__(self, scalar: float) -> "PeriodicField":
        return PeriodicField(self.grid, self.data * float(scalar))

    __rmul__ = __mul__


def sup_norm(f: PeriodicField) -> float:
    """Max over grid points of the max-component vector norm."""
    return float(np.max(np.abs(f.data)))


def lp_norm(f: PeriodicField, p: float) -> float:
    """(cell volume * sum over points and components of |.|^p)^(1/p); p=inf -> sup."""
    if p == math.inf:
        return sup_norm(f)
    if p < 1:
        raise FieldError(f"lp_norm requires p >= 1, got p={p}")
    cell = f.grid.h**3
    # np.sum is pairwise; the reduction is partition-order independent.
    return float((cell * np.sum(np.abs(f.data) ** p)) ** (1.0 / p))


def spectral_energy(f: PeriodicField) -> float:
    """Cell-volume-weighted spectral energy; equals lp_norm(f, 2)**2 (Plancherel)."""
    n = f.grid.n
    spec = f.spectral
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    total = np.sum(w * np.abs(spec) ** 2)
    return float(total * f.grid.h**3 / n**3)


def _derivative_multiplier(grid: Grid, zeta: MultiIndex) -> np.ndarray:
    mult = np.ones((grid.n, grid.n, grid.n // 2 + 1), dtype=np.complex128)
    axes_k = (grid.kx, grid.ky, grid.kz)
    nyq = grid.n // 2
    for axis, order in enumerate(zeta.orders):
        if order == 0:
            continue
        mult = mult * (1j * axes_k[axis]) ** order
        if order % 2 == 1:
            # Odd powers of ik at the Nyquist mode are sign-ambiguous; zero them.
            if axis == 0:
                mult[nyq, :, :] = 0.0
            elif axis == 1:
                mult[:, nyq, :] = 0.0
            else:
                mult[:, :, nyq] = 0.0
    return mult


def spectral_derivative(
    f: PeriodicField,
    zeta: MultiIndex | tuple[int, int, int],
    k_max: int = DEFAULT_K_MAX,
    dealias: bool = False,
    spectral_filter: SpectralFilter | None = None,
) -> PeriodicField:
    """Component-wise partial derivative by wavenumber multiplication.

    Odd-order factors zero the Nyquist mode of their axis. An optional
    exponential filter damps the highest modes for high-order requests.
    """
    if not isinstance(zeta, MultiIndex):
        zeta = MultiIndex(tuple(zeta))
    if zeta.total > k_max:
        raise DerivativeOrderError(
            f"derivative order {zeta.total} exceeds k_max={k_max}"
        )
    mult = _derivative_multiplier(f.grid, zeta)
    if spectral_filter is not None:
        ratio = np.sqrt(f.grid.k_sq) / f.grid.k_nyquist
        mult = mult * np.exp(-spectral_filter.amplitude * ratio ** (2 * spectral_filter.order))
    if dealias:
        mult = mult * f.grid.dealias_mask
    spec = f.spectral * mult
    data = _fft.irfftn(spec, s=(f.grid.n,) * 3, axes=(1, 2, 3))
    if not np.all(np.isfinite(data)):
        raise NonFiniteFieldError(
            f"derivative of order {zeta.orders} produced non-finite values", orders=zeta.orders
        )
    return PeriodicField(f.grid, data, spectral=spec)


def curl(f: PeriodicField) -> PeriodicField:
    """Spectral curl; exact for band-limited fields."""
    g = f.grid
    s = f.spectral
    cx = 1j * (g.ky * s[2] - g.kz * s[1])
    cy = 1j * (g.kz * s[0] - g.kx * s[2])
    cz = 1j * (g.kx * s[1] - g.ky * s[0])
    return PeriodicField.from_spectral(g, np.stack([cx, cy, cz]))


def divergence(f: PeriodicField) -> np.ndarray:
    """Physical-space divergence field (scalar array)."""
    g = f.grid
    s = f.spectral
    d = 1j * (g.kx * s[0] + g.ky * s[1] + g.kz * s[2])
    return _fft.irfftn(d, s=(g.n,) * 3)


def leray_project(spec: np.ndarray, grid: Grid) -> np.ndarray:
    """Remove kappa (kappa . u_hat)/|kappa|^2; the k=0 mode is left untouched."""
    k_sq = grid.k_sq.copy()
    k_sq[0, 0, 0] = 1.0
    kdotu = grid.kx * spec[0] + grid.ky * spec[1] + grid.kz * spec[2]
    factor = kdotu / k_sq
    out = np.stack(
        [spec[0] - grid.kx * factor, spec[1] - grid.ky * factor, spec[2] - grid.kz * factor]
    )
    return out


def gradient_energy(f: PeriodicField) -> float:
    """Spectral evaluation of the squared L2 norm of the full velocity gradient."""
    n = f.grid.n
    spec = f.spectral
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    total = np.sum(w * f.grid.k_sq * np.abs(spec) ** 2)
    return float(total * f.grid.h**3 / n**3)


def derivative_sup_norm(
    f: PeriodicField,
    order: int,
    all_multi_indices: bool = False,
    k_max: int = DEFAULT_K_MAX,
    spectral_filter: SpectralFilter | None = None,
) -> float:
    """Sup-norm of the order-``order`` derivative.

    Default restricts to the first-axis derivative; with ``all_multi_indices``
    it is maximized over every multi-index of that order.
    """
    if order == 0:
        return sup_norm(f)
    if all_multi_indices:
        return max(
            sup_norm(spectral_derivative(f, z, k_max=k_max, spectral_filter=spectral_filter))
            for z in multi_indices(order)
        )
    return sup_norm(
        spectral_derivative(
            f, MultiIndex.along_axis(order), k_max=k_max, spectral_filter=spectral_filter
        )
    )


class InfeasibleExponentsError(FieldError):
    """The interpolation-exponent relation has no admissible s."""


def gn_ratio(
    f: PeriodicField,
    j: int,
    m: int,
    p: float,
    q: float,
    r: float,
    d: int = 3,
    k_max: int = DEFAULT_K_MAX,
) -> float:
    """Interpolation-inequality ratio ||D^j f||_p / (||D^m f||_r^s ||f||_q^(1-s)).

    s solves 1/p = j/d + (1/r - m/d) s + (1-s)/q and must satisfy j/m <= s <= 1.
    Derivative norms are maximized over multi-indices of the given order. The
    caller compares the ratio against a constant bound.
    """
    inv = lambda e: 0.0 if e == math.inf else 1.0 / e
    num = inv(p) - j / d - inv(q)
    den = inv(r) - m / d - inv(q)
    tol = 1e-12
    if abs(den) < tol:
        if abs(num) < tol:
            s = 0.0
        else:
            raise InfeasibleExponentsError("exponent relation has no solution for s")
    else:
        s = num / den
    lo = j / m if m > 0 else 0.0
    if not (lo - tol <= s <= 1.0 + tol):
        raise InfeasibleExponentsError(
            f"s={s:.6g} outside admissible range [{lo:.6g}, 1]"
        )
    s = min(max(s, lo), 1.0)

    def dnorm(order, exponent):
        if order == 0:
            return lp_norm(f, exponent)
        return max(
            lp_norm(spectral_derivative(f, z, k_max=k_max), exponent)
            for z in multi_indices(order)
        )

    lhs = dnorm(j, p)
    if s == 0.0:
        denom = lp_norm(f, q)
    elif s == 1.0:
        denom = dnorm(m, r)
    else:
        denom = dnorm(m, r) ** s * lp_norm(f, q) ** (1.0 - s)
    if denom == 0.0:
        raise FieldError("interpolation denominator vanishes")
    return lhs / denom


def trilinear_interpolate(values: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Periodic trilinear interpolation of a scalar grid array at physical points."""
    pts = np.asarray(points, dtype=np.float64)
    squeeze = pts.ndim == 1
    pts = np.atleast_2d(pts)
    coords = pts / grid.h
    base = np.floor(coords).astype(np.int64)
    frac = coords - base
    n = grid.n
    i0 = np.mod(base, n)
    i1 = np.mod(base + 1, n)
    fx, fy, fz = frac[:, 0], frac[:, 1], frac[:, 2]
    v = np.zeros(len(pts))
    for cx, wx in ((i0[:, 0], 1 - fx), (i1[:, 0], fx)):
        for cy, wy in ((i0[:, 1], 1 - fy), (i1[:, 1], fy)):
            for cz, wz in ((i0[:, 2], 1 - fz), (i1[:, 2], fz)):
                v += wx * wy * wz * values[cx, cy, cz]
    return v[0] if squeeze else v
