"""Super-level-set sparseness diagnostics on periodic grids.

Implements directional (line-segment) and volumetric (ball) occupancy of the
super-level sets of the signed component parts of a field, semi-mixedness,
membership tests for the sparseness class at norm-dependent scales, scale-of-
sparseness estimation, a priori scale formulas, the negative-Sobolev test
quantity, and a weak-Lp tail estimator.

Conventions: the pointwise vector norm is the max over components; ball
membership uses the voxel-center rule so results agree exactly with direct
voxel counting; segment occupancy thresholds the trilinearly interpolated
signed part (sub-grid accurate, no staircase bias).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft as _fft

from .grid import (
    Grid,
    MultiIndex,
    PeriodicField,
    lp_norm,
    spectral_derivative,
    sup_norm,
    trilinear_interpolate,
)


class SparsenessError(ValueError):
    pass


class UnresolvableScaleError(SparsenessError):
    """Requested scale cannot be resolved on this grid."""


@dataclass(frozen=True)
class SparsenessParams:
    """Level fraction, occupancy ratio, size parameter and scaling exponent."""

    lam: float
    delta: float
    c0: float
    alpha: float
    d: int = 3

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise SparsenessError(f"lam must be in (0, 1), got {self.lam}")
        if not 0.0 < self.delta < 1.0:
            raise SparsenessError(f"delta must be in (0, 1), got {self.delta}")
        if self.c0 <= 1.0:
            raise SparsenessError(f"c0 must exceed 1, got {self.c0}")
        if self.alpha <= 0.0:
            raise SparsenessError(f"alpha must be positive, got {self.alpha}")
        if self.d != 3:
            raise SparsenessError("only dimension 3 is supported")

    def require_tuning_range(self):
        """Enforce delta > 1/(1+lam), needed by the duality-based tests."""
        if self.delta <= 1.0 / (1.0 + self.lam):
            raise SparsenessError(
                f"delta={self.delta} must exceed 1/(1+lam)={1/(1+self.lam):.6g}"
            )


@dataclass(frozen=True)
class MaskProvenance:
    component: int
    sign: int
    lam: float
    sup: float
    source: str = "field"


@dataclass
class LevelSetMask:
    """Boolean super-level mask plus the signed part it was thresholded from."""

    grid: Grid
    mask: np.ndarray
    part: np.ndarray
    threshold: float
    provenance: MaskProvenance

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        self.part = np.asarray(self.part, dtype=np.float64)
        if self.mask.shape != (self.grid.n,) * 3 or self.part.shape != self.mask.shape:
            raise SparsenessError("mask/part shape does not match grid")

    @classmethod
    def from_scalar(cls, grid: Grid, part: np.ndarray, threshold: float,
                    provenance: MaskProvenance | None = None) -> "LevelSetMask":
        prov = provenance or MaskProvenance(0, +1, math.nan, math.nan, source="synthetic")
        return cls(grid, np.asarray(part) > threshold, part, float(threshold), prov)

    @classmethod
    def from_indicator(cls, grid: Grid, indicator: np.ndarray) -> "LevelSetMask":
        ind = np.asarray(indicator, dtype=bool)
        prov = MaskProvenance(0, +1, math.nan, math.nan, source="indicator")
        return cls(grid, ind, ind.astype(np.float64), 0.5, prov)

    @property
    def fraction(self) -> float:
        return float(np.count_nonzero(self.mask)) / self.mask.size


def signed_part(f: PeriodicField, i: int, sign) -> np.ndarray:
    """Positive or negative part of component i."""
    s = _normalize_sign(sign)
    comp = f.component(i)
    return np.maximum(s * comp, 0.0)


def _normalize_sign(sign) -> int:
    if sign in (+1, "+", "plus"):
        return +1
    if sign in (-1, "-", "minus"):
        return -1
    raise SparsenessError(f"sign must be +1 or -1, got {sign!r}")


def superlevel_mask(f: PeriodicField, i: int, sign, lam: float) -> LevelSetMask:
    """Open super-level set of the signed component part above lam * sup-norm."""
    if not 0.0 < lam < 1.0:
        raise SparsenessError(f"lam must be in (0, 1), got {lam}")
    if i not in (0, 1, 2):
        raise SparsenessError(f"component index must be 0, 1 or 2, got {i}")
    s = _normalize_sign(sign)
    sup = sup_norm(f)
    part = signed_part(f, i, s)
    threshold = lam * sup
    prov = MaskProvenance(component=i, sign=s, lam=lam, sup=sup)
    return LevelSetMask(f.grid, part > threshold, part, threshold, prov)


def chosen_component(f: PeriodicField) -> tuple[np.ndarray, np.ndarray]:
    """Per point, the (i, sign) attaining the max-component norm.

    Ties break to the lowest index; sign + is preferred when the value is 0.
    """
    absdata = np.abs(f.data)
    idx = np.argmax(absdata, axis=0)
    vals = np.take_along_axis(f.data, idx[None], axis=0)[0]
    sign = np.where(vals < 0.0, -1, +1).astype(np.int8)
    return idx.astype(np.int8), sign


def all_superlevel_masks(f: PeriodicField, lam: float) -> list[LevelSetMask]:
    """Masks for the six signed component parts, ordered (0,+),(0,-),(1,+),..."""
    return [superlevel_mask(f, i, s, lam) for i in range(3) for s in (+1, -1)]


def _mask_slot(idx, sign):
    return idx * 2 + (sign < 0)


# ---------------------------------------------------------------------------
# volumetric occupancy (voxel-center rule)
# ---------------------------------------------------------------------------

def _cell_radius_sq(r: float, h: float) -> float:
    # shared membership predicate: integer_offset_sq <= this
    return (r / h) ** 2 * (1.0 + 1e-12)


@lru_cache(maxsize=128)
def _ball_kernel_hat(n: int, crsq_key: float):
    idx = np.arange(n)
    cen = np.minimum(idx, n - idx)  # centered integer offsets, absolute value
    d2 = (
        cen.reshape(-1, 1, 1) ** 2
        + cen.reshape(1, -1, 1) ** 2
        + cen.reshape(1, 1, -1) ** 2
    )
    kernel = (d2 <= crsq_key).astype(np.float64)
    return _fft.rfftn(kernel), int(np.count_nonzero(kernel))


def occupancy_count_field(mask: LevelSetMask, r: float) -> tuple[np.ndarray, int]:
    """(counts of occupied voxel centers within r of every grid point, ball size)."""
    g = mask.grid
    _check_ball_scale(r, g)
    mhat = _fft.rfftn(mask.mask.astype(np.float64))
    return _counts_from_hat(mhat, g, r)


def _counts_from_hat(mask_hat: np.ndarray, g: Grid, r: float) -> tuple[np.ndarray, int]:
    crsq = _cell_radius_sq(r, g.h)
    khat, ball_size = _ball_kernel_hat(g.n, crsq)
    counts = _fft.irfftn(mask_hat * khat, s=(g.n,) * 3)
    return np.rint(counts).astype(np.int64), ball_size


class _VolScanner:
    """Occupancy ratios of several masks at many scales, reusing mask FFTs."""

    def __init__(self, masks: list[LevelSetMask]):
        self.masks = masks
        self.grid = masks[0].grid
        self._hats: dict[int, np.ndarray] = {}

    def ratio_field(self, slot: int, r: float) -> np.ndarray:
        if slot not in self._hats:
            self._hats[slot] = _fft.rfftn(self.masks[slot].mask.astype(np.float64))
        counts, ball = _counts_from_hat(self._hats[slot], self.grid, r)
        return counts / ball


def _check_ball_scale(r: float, g: Grid):
    if r < 2.0 * g.h:
        raise UnresolvableScaleError(
            f"ball scale r={r:.6g} is below 2 grid cells (h={g.h:.6g})"
        )
    if r > g.length / 2.0:
        raise SparsenessError(
            f"ball scale r={r:.6g} exceeds half the box (periodic self-overlap)"
        )


def sparse_vol(mask: LevelSetMask, x0, r: float, delta: float) -> tuple[bool, float]:
    """Occupied fraction of voxel centers in the periodic ball around x0."""
    g = mask.grid
    _check_ball_scale(r, g)
    x0 = np.asarray(x0, dtype=np.float64)
    crsq = _cell_radius_sq(r, g.h)
    grid_idx = x0 / g.h
    nearest = np.rint(grid_idx).astype(np.int64)
    on_grid = np.all(np.abs(grid_idx - nearest) < 1e-9)
    rad = int(math.floor(r / g.h)) + 1
    offs = np.arange(-rad, rad + 1)
    oi, oj, ok = np.meshgrid(offs, offs, offs, indexing="ij")
    if on_grid:
        d2 = (oi**2 + oj**2 + ok**2).astype(np.float64)
    else:
        frac = grid_idx - nearest
        d2 = (oi - frac[0]) ** 2 + (oj - frac[1]) ** 2 + (ok - frac[2]) ** 2
    inside = d2 <= crsq
    ii = np.mod(nearest[0] + oi[inside], g.n)
    jj = np.mod(nearest[1] + oj[inside], g.n)
    kk = np.mod(nearest[2] + ok[inside], g.n)
    total = int(np.count_nonzero(inside))
    occupied = int(np.count_nonzero(mask.mask[ii, jj, kk]))
    ratio = occupied / total
    return ratio <= delta, ratio


@dataclass
class SemiMixedResult:
    passed: bool
    worst_ratio: float
    worst_point: tuple[float, float, float]
    ball_size: int

    def __bool__(self):
        return self.passed


def semi_mixed(mask: LevelSetMask, r: float, delta: float) -> SemiMixedResult:
    """Volumetric delta-sparseness at scale r around every collocation point."""
    g = mask.grid
    counts, ball_size = occupancy_count_field(mask, r)
    ratios = counts / ball_size
    worst_flat = int(np.argmax(ratios))
    worst_idx = np.unravel_index(worst_flat, ratios.shape)
    worst = float(ratios[worst_idx])
    point = tuple(float(g.h * i) for i in worst_idx)
    return SemiMixedResult(worst <= delta, worst, point, ball_size)


# ---------------------------------------------------------------------------
# directional occupancy
# ---------------------------------------------------------------------------

def fibonacci_sphere(m: int) -> np.ndarray:
    """m approximately uniform unit vectors (deterministic)."""
    i = np.arange(m, dtype=np.float64)
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    z = 1.0 - (2.0 * i + 1.0) / m
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = 2.0 * math.pi * i / golden
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


def direction_set(m_dirs: int) -> np.ndarray:
    """Fibonacci-sphere sample plus the 3 axes and 4 main diagonals."""
    if m_dirs < 3:
        raise SparsenessError(f"m_dirs must be at least 3, got {m_dirs}")
    axes = np.eye(3)
    diag = np.array(
        [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]], dtype=np.float64
    ) / math.sqrt(3.0)
    return np.concatenate([fibonacci_sphere(m_dirs), axes, diag], axis=0)


def _segment_offsets(r: float, h: float) -> np.ndarray:
    """Midpoint sample offsets in [-r, r] at spacing <= h/2; >= 2 intervals."""
    m = int(math.ceil(4.0 * r / h))
    if m < 2:
        raise UnresolvableScaleError(
            f"segment scale r={r:.6g} resolves fewer than 2 line samples (h={h:.6g})"
        )
    edges = np.linspace(-r, r, m + 1)
    return 0.5 * (edges[:-1] + edges[1:])


def sparse_1d(target: LevelSetMask, x0, nu, r: float, delta: float) -> tuple[bool, float]:
    """Occupied fraction of the segment (x0 - r nu, x0 + r nu).

    The segment measure is estimated by thresholding the trilinearly
    interpolated signed part at sample spacing h/2 (sub-grid accurate).
    """
    nu = np.asarray(nu, dtype=np.float64)
    norm = float(np.linalg.norm(nu))
    if abs(norm - 1.0) > 1e-9:
        raise SparsenessError(f"direction must be a unit vector, |nu|={norm:.6g}")
    if r <= 0:
        raise SparsenessError(f"scale must be positive, got r={r}")
    offsets = _segment_offsets(r, target.grid.h)
    pts = np.asarray(x0, dtype=np.float64)[None, :] + offsets[:, None] * nu[None, :]
    vals = trilinear_interpolate(target.part, target.grid, pts)
    ratio = float(np.count_nonzero(vals > target.threshold)) / len(offsets)
    return ratio <= delta, ratio


def best_direction(target: LevelSetMask, x0, r: float, m_dirs: int = 24) -> tuple[np.ndarray, float]:
    """Direction minimizing the segment occupancy (first minimum on ties)."""
    dirs = direction_set(m_dirs)
    best_nu = dirs[0]
    best_ratio = math.inf
    for nu in dirs:
        _, ratio = sparse_1d(target, x0, nu, r, delta=1.0)
        if ratio < best_ratio - 1e-15:
            best_ratio = ratio
            best_nu = nu
    return best_nu, best_ratio


# ---------------------------------------------------------------------------
# class membership at norm-dependent scales
# ---------------------------------------------------------------------------

def _sample_points(grid: Grid, sample) -> np.ndarray:
    """Grid indices of the sampled points: all, or a stratified sub-lattice."""
    n = grid.n
    if sample == "all":
        stride = 1
    else:
        target = max(int(sample), 4096)
        per_axis = max(1, int(round(target ** (1.0 / 3.0))))
        stride = max(1, n // per_axis)
    idx = np.arange(0, n, stride)
    ii, jj, kk = np.meshgrid(idx, idx, idx, indexing="ij")
    return np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1)


def geometric_c_values(c0: float, count: int = 32) -> np.ndarray:
    return np.geomspace(1.0 / c0, c0, count)


@dataclass
class SparsenessReport:
    """Per-point and aggregate sparseness verdicts at the scanned scales."""

    mode: str
    lam: float
    delta: float
    c_values: np.ndarray
    radii: np.ndarray
    resolvable: np.ndarray
    point_indices: np.ndarray
    chosen: np.ndarray          # slot 2*i + (sign<0) per sampled point
    admissible: np.ndarray      # (points, c) bool, False at unresolvable c
    verdict: bool
    fraction_passing: float
    rho_star: float             # max over points of each point's smallest admissible r
    admissible_c_common: np.ndarray  # c admissible at every sampled point
    unresolved_c_count: int
    ratios: np.ndarray | None = None

    def admissible_c_interval(self) -> tuple[float, float] | None:
        common = self.c_values[self.admissible_c_common]
        if len(common) == 0:
            return None
        return float(common.min()), float(common.max())


def z_alpha_check(
    f: PeriodicField,
    params: SparsenessParams,
    mode: str = "vol",
    sample="all",
    m_dirs: int = 24,
    n_c_values: int = 32,
    store_ratios: bool = False,
) -> SparsenessReport:
    """Sparseness-class membership of f at scales c / sup^alpha, c in [1/c0, c0].

    For each sampled point the component attaining the max-component norm is
    selected (lowest index first, + before -), and the admissible set of c
    values where the chosen mode's delta-sparseness holds at r = c/sup^alpha
    is recorded. Verdict: every sampled point has a non-empty admissible set,
    with unresolvable scales excluded (and counted); a report with zero
    resolvable scales carries verdict False.
    """
    sup = sup_norm(f)
    if sup <= 0.0:
        raise SparsenessError("sparseness class membership requires a nonzero field")
    g = f.grid
    c_values = geometric_c_values(params.c0, n_c_values)
    radii = c_values / sup**params.alpha
    if mode == "vol":
        resolvable = (radii >= 2.0 * g.h) & (radii <= g.length / 2.0)
    elif mode == "1d":
        min_r = np.array([_min_segment_scale(g.h)])[0]
        resolvable = (radii >= min_r) & (radii <= g.length / 2.0)
    else:
        raise SparsenessError(f"mode must be 'vol' or '1d', got {mode!r}")

    pts_idx = _sample_points(g, sample)
    idx_arr, sign_arr = chosen_component(f)
    slots = _mask_slot(
        idx_arr[pts_idx[:, 0], pts_idx[:, 1], pts_idx[:, 2]].astype(np.int64),
        sign_arr[pts_idx[:, 0], pts_idx[:, 1], pts_idx[:, 2]].astype(np.int64),
    )
    masks = all_superlevel_masks(f, params.lam)

    n_pts = len(pts_idx)
    admissible = np.zeros((n_pts, len(c_values)), dtype=bool)
    ratios = np.full((n_pts, len(c_values)), np.nan) if store_ratios else None

    if mode == "vol":
        scanner = _VolScanner(masks)
        for ci in np.nonzero(resolvable)[0]:
            r = float(radii[ci])
            ratio_at_point = np.empty(n_pts)
            for slot in np.unique(slots):
                ratio_field = scanner.ratio_field(int(slot), r)
                sel = slots == slot
                ratio_at_point[sel] = ratio_field[
                    pts_idx[sel, 0], pts_idx[sel, 1], pts_idx[sel, 2]
                ]
            admissible[:, ci] = ratio_at_point <= params.delta
            if store_ratios:
                ratios[:, ci] = ratio_at_point
    else:
        points_phys = pts_idx * g.h
        dirs = direction_set(m_dirs)
        for ci in np.nonzero(resolvable)[0]:
            r = float(radii[ci])
            best = np.full(n_pts, np.inf)
            offsets = _segment_offsets(r, g.h)
            for slot in np.unique(slots):
                sel = slots == slot
                pts_g = points_phys[sel]
                target = masks[slot]
                for nu in dirs:
                    sample_pts = pts_g[:, None, :] + offsets[None, :, None] * nu[None, None, :]
                    vals = trilinear_interpolate(
                        target.part, g, sample_pts.reshape(-1, 3)
                    ).reshape(len(pts_g), -1)
                    occ = np.count_nonzero(vals > target.threshold, axis=1) / len(offsets)
                    best[sel] = np.minimum(best[sel], occ)
            admissible[:, ci] = best <= params.delta
            if store_ratios:
                ratios[:, ci] = best

    has_admissible = admissible.any(axis=1)
    any_resolvable = bool(resolvable.any())
    verdict = bool(has_admissible.all()) and any_resolvable
    first_r = np.where(
        has_admissible,
        np.where(admissible, radii[None, :], np.inf).min(axis=1),
        np.inf,
    )
    rho_star = float(first_r.max()) if any_resolvable else math.inf
    return SparsenessReport(
        mode=mode,
        lam=params.lam,
        delta=params.delta,
        c_values=c_values,
        radii=radii,
        resolvable=resolvable,
        point_indices=pts_idx,
        chosen=slots,
        admissible=admissible,
        verdict=verdict,
        fraction_passing=float(has_admissible.mean()),
        rho_star=rho_star,
        admissible_c_common=admissible.all(axis=0),
        unresolved_c_count=int(np.count_nonzero(~resolvable)),
        ratios=ratios,
    )


def _min_segment_scale(h: float) -> float:
    return h / 2.0


@dataclass
class ScaleOfSparsenessReport:
    scales: np.ndarray
    point_indices: np.ndarray
    rho_per_point: np.ndarray  # +inf sentinel where no scanned scale is admissible
    rho_global: float
    all_points_admissible: bool


def scale_of_sparseness(
    f: PeriodicField,
    lam: float,
    delta: float,
    mode: str = "vol",
    n_scales: int = 24,
    sample="all",
    m_dirs: int = 24,
) -> ScaleOfSparsenessReport:
    """Smallest scanned scale at which the chosen-component super-level set is
    delta-sparse around each sampled point; the global value is the max.

    The scale grid is geometric on [2h, L/4] (segment mode starts at the
    smallest resolvable segment). Points admitting no scanned scale report the
    +inf sentinel and flag the aggregate.
    """
    sup = sup_norm(f)
    if sup <= 0.0:
        raise SparsenessError("scale of sparseness requires a nonzero field")
    if mode not in ("vol", "1d"):
        raise SparsenessError(f"mode must be 'vol' or '1d', got {mode!r}")
    g = f.grid
    scales = np.geomspace(2.0 * g.h, g.length / 4.0, n_scales)

    pts_idx = _sample_points(g, sample)
    idx_arr, sign_arr = chosen_component(f)
    slots = _mask_slot(
        idx_arr[pts_idx[:, 0], pts_idx[:, 1], pts_idx[:, 2]].astype(np.int64),
        sign_arr[pts_idx[:, 0], pts_idx[:, 1], pts_idx[:, 2]].astype(np.int64),
    )
    masks = all_superlevel_masks(f, lam)

    n_pts = len(pts_idx)
    rho = np.full(n_pts, np.inf)
    remaining = np.ones(n_pts, dtype=bool)
    dirs = direction_set(m_dirs) if mode == "1d" else None
    points_phys = pts_idx * g.h
    scanner = _VolScanner(masks) if mode == "vol" else None

    for r in scales:
        if not remaining.any():
            break
        r = float(r)
        if mode == "vol":
            ratio_at_point = np.full(n_pts, np.inf)
            for slot in np.unique(slots[remaining]):
                ratio_field = scanner.ratio_field(int(slot), r)
                sel = remaining & (slots == slot)
                ratio_at_point[sel] = ratio_field[
                    pts_idx[sel, 0], pts_idx[sel, 1], pts_idx[sel, 2]
                ]
            ok = remaining & (ratio_at_point <= delta)
        else:
            offsets = _segment_offsets(r, g.h)
            best = np.full(n_pts, np.inf)
            for slot in np.unique(slots[remaining]):
                sel = remaining & (slots == slot)
                pts_g = points_phys[sel]
                target = masks[slot]
                for nu in dirs:
                    sample_pts = pts_g[:, None, :] + offsets[None, :, None] * nu[None, None, :]
                    vals = trilinear_interpolate(
                        target.part, g, sample_pts.reshape(-1, 3)
                    ).reshape(len(pts_g), -1)
                    occ = np.count_nonzero(vals > target.threshold, axis=1) / len(offsets)
                    best[sel] = np.minimum(best[sel], occ)
            ok = remaining & (best <= delta)
        rho[ok] = r
        remaining &= ~ok

    finite = np.isfinite(rho)
    return ScaleOfSparsenessReport(
        scales=scales,
        point_indices=pts_idx,
        rho_per_point=rho,
        rho_global=float(rho.max()),
        all_points_admissible=bool(finite.all()),
    )


# ---------------------------------------------------------------------------
# scale formulas and dual-norm test
# ---------------------------------------------------------------------------

def apriori_scale(dk_supnorm: float, k: int, p: float = 2.0, c: float = 1.0,
                  variant: str = "velocity") -> float:
    """Guaranteed sparseness scale c * ||D^k .||_inf^(-1/(k+3/p)) (velocity)
    or c * ||D^k .||_inf^(-1/(k+5/2)) (vorticity, p=1)."""
    if dk_supnorm <= 0 or c <= 0:
        raise SparsenessError("apriori_scale requires positive inputs")
    if k < 0:
        raise SparsenessError(f"order must be non-negative, got {k}")
    if variant == "velocity":
        exponent = 1.0 / (k + 3.0 / p)
    elif variant == "vorticity":
        exponent = 1.0 / (k + 2.5)
    else:
        raise SparsenessError(f"variant must be 'velocity' or 'vorticity', got {variant!r}")
    return c * dk_supnorm ** (-exponent)


@dataclass
class WkpTestResult:
    lhs: float
    rhs: float
    cstar: float
    eta: float
    verdict: bool
    semi_mixed_all: bool | None
    semi_mixed_per_mask: list[bool] | None


def wkp_test_quantity(
    f: PeriodicField,
    zeta: MultiIndex | tuple[int, int, int],
    r: float,
    p: float,
    lam: float,
    delta: float,
    kappa_dual: float = 1.0,
    cross_check: bool = True,
) -> WkpTestResult:
    """Negative-Sobolev sufficient test for r-semi-mixedness of D^zeta f.

    lhs is the dominating bound ||f||_p; rhs is
    kappa_dual * (varpi/2) * (delta(1+lam)-1)^(1/p) * (eta/2)^k * r^(k+3/p) * ||D^zeta f||_inf
    with (1+eta)^3 = (delta(1+lam)+1)/2 and varpi the unit-ball volume.
    A true verdict implies semi-mixedness, so the result is cross-checked
    against the direct volumetric scan of all six signed-part masks.
    """
    if not isinstance(zeta, MultiIndex):
        zeta = MultiIndex(tuple(zeta))
    if not 0.0 < lam < 1.0 or not 0.0 < delta < 1.0:
        raise SparsenessError("lam and delta must lie in (0, 1)")
    if delta <= 1.0 / (1.0 + lam):
        raise SparsenessError(
            f"delta={delta} must exceed 1/(1+lam)={1/(1+lam):.6g}"
        )
    if p <= 1.0:
        raise SparsenessError(f"p must exceed 1, got {p}")
    k = zeta.total
    eta = ((delta * (1.0 + lam) + 1.0) / 2.0) ** (1.0 / 3.0) - 1.0
    varpi = 4.0 * math.pi / 3.0
    cstar = kappa_dual * (varpi / 2.0) * (delta * (1.0 + lam) - 1.0) ** (1.0 / p) * (eta / 2.0) ** k
    df = spectral_derivative(f, zeta)
    lhs = lp_norm(f, p)
    rhs = cstar * r ** (k + 3.0 / p) * sup_norm(df)
    verdict = lhs <= rhs

    per_mask = None
    mixed_all = None
    if cross_check:
        try:
            per_mask = [
                bool(semi_mixed(m, r, delta)) for m in all_superlevel_masks(df, lam)
            ]
            mixed_all = all(per_mask)
        except (UnresolvableScaleError, SparsenessError):
            per_mask = None
            mixed_all = None
    return WkpTestResult(lhs, rhs, cstar, eta, verdict, mixed_all, per_mask)


def weak_lp_tail(f: PeriodicField, p: float, n_levels: int = 32) -> tuple[float, bool]:
    """Weak-Lp norm estimate sup_s s * mu{|f| > s}^(1/p) over geometric levels.

    The flag reports Chebyshev consistency within a factor 2 at off-level
    thresholds, i.e. the estimated norm is not an undershoot.
    """
    if p < 1:
        raise SparsenessError(f"p must be at least 1, got {p}")
    sup = sup_norm(f)
    if sup == 0.0:
        return 0.0, True
    g = f.grid
    absf = np.max(np.abs(f.data), axis=0)
    levels = sup * np.geomspace(0.02, 1.0 - 1e-9, n_levels)
    cell = g.h**3
    mu = np.array([cell * np.count_nonzero(absf > s) for s in levels])
    estimate = float(np.max(levels * mu ** (1.0 / p)))
    mids = np.sqrt(levels[:-1] * levels[1:])
    consistent = True
    for s in mids:
        vol = cell * np.count_nonzero(absf > s)
        if vol > 2.0 * (estimate / s) ** p:
            consistent = False
            break
    return estimate, consistent
