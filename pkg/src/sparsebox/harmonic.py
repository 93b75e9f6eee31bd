"""Harmonic-measure tools: closed forms, tuning relations, Monte Carlo oracles.

The closed forms live on the unit disk. The extremal configuration is the
pair of boundary-attached slits K_lam = [-1, -1+lam] u [1-lam, 1] on the real
diameter; its harmonic measure at the origin has the arcsin closed form
implemented by :func:`extremal_h`. Two independent Monte Carlo estimators are
provided: walk-on-spheres absorbing on boundary arcs of the circle, and
walk-on-spheres absorbing directly on diameter slits (no conformal transport
needed, arbitrary segment configurations allowed). The segment-to-arc
identification used for validation is documented in docs/notes.md: opening the
two extremal slits maps them onto two arcs centred at angles 0 and pi with
total measure 2*pi*extremal_h(lam).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class HarmonicError(ValueError):
    pass


def extremal_h(lam: float) -> float:
    """Harmonic measure at the origin of the extremal two-slit set.

    (2/pi) arcsin((1-(1-lam)^2)/(1+(1-lam)^2)); increasing, h(0)=0, h(1)=1.
    """
    if not 0.0 <= lam <= 1.0:
        raise HarmonicError(f"lam must be in [0, 1], got {lam}")
    t = (1.0 - lam) ** 2
    return (2.0 / math.pi) * math.asin((1.0 - t) / (1.0 + t))


@dataclass(frozen=True)
class TuningPair:
    """(lam, delta, h) solving lam*h + (1-h) = 2*lam with h = h(delta)."""

    lam: float
    delta: float
    h: float
    constraint_ok: bool

    @property
    def residual(self) -> float:
        return abs(self.lam * self.h + (1.0 - self.h) - 2.0 * self.lam)


def solve_tuning_pair(delta: float) -> TuningPair:
    """Given the occupancy ratio delta, solve the level fraction lam.

    h = (2/pi) arcsin((1-delta^2)/(1+delta^2)) and lam = (1-h)/(2-h).
    The returned pair flags (rather than raises on) delta <= 1/(1+lam).
    """
    if not 0.0 < delta < 1.0:
        raise HarmonicError(f"delta must be in (0, 1), got {delta}")
    h = (2.0 / math.pi) * math.asin((1.0 - delta**2) / (1.0 + delta**2))
    lam = (1.0 - h) / (2.0 - h)
    return TuningPair(lam=lam, delta=delta, h=h, constraint_ok=delta > 1.0 / (1.0 + lam))


def majorize(m: float, big_m: float, h: float) -> float:
    """Subharmonic majorization bound m*h + M*(1-h)."""
    if m > big_m:
        raise HarmonicError(f"m={m} must not exceed M={big_m}")
    if not 0.0 <= h <= 1.0:
        raise HarmonicError(f"h must be in [0, 1], got {h}")
    return m * h + big_m * (1.0 - h)


# ---------------------------------------------------------------------------
# boundary sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcSet:
    """Union of arcs of the unit circle, angles in radians."""

    arcs: tuple[tuple[float, float], ...]  # (start, end), start <= end

    def __post_init__(self):
        for a, b in self.arcs:
            if b < a:
                raise HarmonicError(f"arc ({a}, {b}) has negative length")

    @property
    def measure(self) -> float:
        return sum(b - a for a, b in self.arcs)

    def contains(self, theta: np.ndarray) -> np.ndarray:
        th = np.mod(theta, 2.0 * math.pi)
        hit = np.zeros(th.shape, dtype=bool)
        for a, b in self.arcs:
            lo = np.mod(a, 2.0 * math.pi)
            width = b - a
            rel = np.mod(th - lo, 2.0 * math.pi)
            hit |= rel <= width
        return hit

    @classmethod
    def full_circle(cls) -> "ArcSet":
        return cls(((0.0, 2.0 * math.pi),))

    @classmethod
    def empty(cls) -> "ArcSet":
        return cls(())


@dataclass(frozen=True)
class SegmentSet:
    """Closed subset of the diameter [-1, 1]: union of intervals."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for a, b in self.intervals:
            if not (-1.0 <= a <= b <= 1.0):
                raise HarmonicError(f"interval ({a}, {b}) not inside [-1, 1]")

    @property
    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def distance(self, z: np.ndarray) -> np.ndarray:
        x, y = z.real, z.imag
        d = np.full(z.shape, np.inf)
        for a, b in self.intervals:
            cx = np.clip(x, a, b)
            d = np.minimum(d, np.hypot(x - cx, y))
        return d


def extremal_slits(lam: float) -> SegmentSet:
    """K_lam: the two boundary-attached slits of total measure 2*lam."""
    if not 0.0 < lam < 1.0:
        raise HarmonicError(f"lam must be in (0, 1), got {lam}")
    return SegmentSet(((-1.0, -1.0 + lam), (1.0 - lam, 1.0)))


def extremal_arcs(lam: float) -> ArcSet:
    """Boundary arcs equivalent to K_lam under the slit-opening map.

    Two arcs centred at angles 0 and pi, each of measure pi*extremal_h(lam)
    (conformal invariance; derivation in docs/notes.md).
    """
    h = extremal_h(lam)
    half = 0.5 * math.pi * h
    return ArcSet(
        (
            (-half, half),
            (math.pi - half, math.pi + half),
        )
    )


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    n_walkers: int
    mean_steps: float


def _walker_uniforms(seed: int, n_walkers: int, block: int, block_index: int) -> np.ndarray:
    """Per-walker uniform block from a counter-based generator.

    Block b draws from Philox keyed by (seed, b) -- disjoint streams -- and
    walker w always reads row w, so walker w's randomness is a fixed function
    of (seed, w, step) and estimates do not depend on walker partitioning.
    """
    bitgen = np.random.Philox(key=(int(seed) << 64) | block_index)
    gen = np.random.Generator(bitgen)
    return gen.random((n_walkers, block))


def _check_walkers(n_walkers: int):
    if n_walkers < 1000:
        raise HarmonicError(f"need at least 1000 walkers, got {n_walkers}")


def mc_harmonic_measure(
    arcs: ArcSet,
    z: complex,
    n_walkers: int,
    seed: int = 0,
    exit_tol: float = 1e-6,
    max_blocks: int = 64,
    block: int = 64,
) -> McEstimate:
    """Walk-on-spheres estimate of the harmonic measure of boundary arcs at z.

    Walkers jump uniformly on the largest disk inside the domain until within
    exit_tol of the circle; the exit angle decides membership. stderr is the
    binomial estimate sqrt(p(1-p)/n).
    """
    _check_walkers(n_walkers)
    z = complex(z)
    if abs(z) >= 1.0:
        raise HarmonicError(f"start point must be interior, |z|={abs(z):.6g}")
    pos = np.full(n_walkers, z, dtype=np.complex128)
    active = np.ones(n_walkers, dtype=bool)
    total_steps = 0
    for b in range(max_blocks):
        if not active.any():
            break
        uni = _walker_uniforms(seed, n_walkers, block, b)
        for j in range(block):
            idx = np.nonzero(active)[0]
            if len(idx) == 0:
                break
            radius = 1.0 - np.abs(pos[idx])
            done = radius < exit_tol
            active[idx[done]] = False
            move = idx[~done]
            if len(move) == 0:
                continue
            theta = 2.0 * math.pi * uni[move, j]
            pos[move] += (1.0 - np.abs(pos[move])) * np.exp(1j * theta)
            total_steps += len(move)
    if active.any():
        # stragglers are pinned to their current angle (bias far below noise)
        active[:] = False
    angles = np.angle(pos)
    hits = arcs.contains(angles)
    p = float(np.mean(hits))
    stderr = math.sqrt(max(p * (1.0 - p), 1e-30) / n_walkers)
    return McEstimate(p, stderr, n_walkers, total_steps / n_walkers)


def mc_harmonic_measure_slits(
    segments: SegmentSet,
    z: complex,
    n_walkers: int,
    seed: int = 0,
    exit_tol: float = 1e-6,
    max_blocks: int = 256,
    block: int = 64,
) -> McEstimate:
    """Walk-on-spheres in the disk with absorption on diameter slits.

    Estimates the probability that Brownian motion from z reaches the segment
    set before the circle -- the harmonic measure of the slits as part of the
    boundary of the slit domain. Works for any segment configuration.
    """
    _check_walkers(n_walkers)
    z = complex(z)
    if abs(z) >= 1.0:
        raise HarmonicError(f"start point must be interior, |z|={abs(z):.6g}")
    if segments.distance(np.array([z]))[0] <= exit_tol:
        raise HarmonicError("start point lies on the segment set")
    pos = np.full(n_walkers, z, dtype=np.complex128)
    active = np.ones(n_walkers, dtype=bool)
    hit_slit = np.zeros(n_walkers, dtype=bool)
    total_steps = 0
    for b in range(max_blocks):
        if not active.any():
            break
        uni = _walker_uniforms(seed, n_walkers, block, b)
        for j in range(block):
            idx = np.nonzero(active)[0]
            if len(idx) == 0:
                break
            d_circle = 1.0 - np.abs(pos[idx])
            d_slit = segments.distance(pos[idx])
            radius = np.minimum(d_circle, d_slit)
            done = radius < exit_tol
            hit_slit[idx[done]] = d_slit[done] < d_circle[done]
            active[idx[done]] = False
            move = idx[~done]
            if len(move) == 0:
                continue
            theta = 2.0 * math.pi * uni[move, j]
            pos[move] += radius[~done] * np.exp(1j * theta)
            total_steps += len(move)
    if active.any():
        idx = np.nonzero(active)[0]
        d_circle = 1.0 - np.abs(pos[idx])
        d_slit = segments.distance(pos[idx])
        hit_slit[idx] = d_slit < d_circle
        active[:] = False
    p = float(np.mean(hit_slit))
    stderr = math.sqrt(max(p * (1.0 - p), 1e-30) / n_walkers)
    return McEstimate(p, stderr, n_walkers, total_steps / n_walkers)


# ---------------------------------------------------------------------------
# blow-up-exclusion inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExclusionInputs:
    """Inputs of the exclusion inequality; eta and h_star are derived."""

    lam: float
    delta: float
    k: int
    c: float
    mu: float = 1.0
    d: int = 3
    eps: float = 0.1
    ell: int = 1

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0 or not 0.0 < self.delta < 1.0:
            raise HarmonicError("lam and delta must lie in (0, 1)")
        if self.k < 1:
            raise HarmonicError(f"k must be at least 1, got {self.k}")
        if not 0.0 < self.c < 1.0:
            raise HarmonicError(f"c must lie in (0, 1), got {self.c}")
        if self.eps <= 0 or self.ell < 1 or self.mu <= 0:
            raise HarmonicError("eps, mu must be positive and ell >= 1")

    @property
    def eta(self) -> float:
        value = ((self.delta * (1.0 + self.lam) + 1.0) / 2.0) ** (1.0 / self.d) - 1.0
        if value <= 0.0:
            raise HarmonicError(
                "degenerate parameters: delta*(1+lam) must exceed 1 for a positive eta"
            )
        return value

    @property
    def h_star(self) -> float:
        t = self.delta ** (2.0 / self.d)
        return (2.0 / math.pi) * math.asin((1.0 - t) / (1.0 + t))


def exclusion_lhs(inputs: ExclusionInputs) -> tuple[float, bool]:
    """lam*h* + exp((2e/eta)(1+eps)^(ell/k) c^(1/(k+1))) * (1-h*), vs mu.

    As c -> 0 the exponential tends to 1 and the value tends to
    lam*h* + (1-h*) < 1.
    """
    eta = inputs.eta
    h = inputs.h_star
    growth = (2.0 * math.e / eta) * (1.0 + inputs.eps) ** (inputs.ell / inputs.k)
    exponent = growth * inputs.c ** (1.0 / (inputs.k + 1))
    # exp overflows beyond ~709; the inequality is then violated by any mu
    amplification = math.inf if exponent > 700.0 else math.exp(exponent)
    value = inputs.lam * h + amplification * (1.0 - h)
    return value, value <= inputs.mu


def default_ell(u0_sup: float, eps: float = 0.1) -> int:
    """Smallest ell with (1+eps)^ell covering the initial sup-norm; at least 1."""
    if u0_sup <= 1.0:
        return 1
    return max(1, math.ceil(math.log(u0_sup) / math.log(1.0 + eps)))
