"""Pseudo-spectral integrator for the incompressible momentum equation.

Velocity formulation with exact spectral projection onto divergence-free
fields (pressure is never formed), viscosity fixed at 1, zero forcing.
Time stepping is integrating-factor RK4: diffusion is applied exactly via
exp(-|k|^2 dt) and the rotation-form nonlinear term is evaluated
pseudo-spectrally with mandatory 2/3-rule dealiasing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as _fft

from .grid import (
    Grid,
    PeriodicField,
    curl,
    divergence,
    derivative_sup_norm,
    grid_for,
    leray_project,
    lp_norm,
    sup_norm,
)


class SolverError(RuntimeError):
    pass


class CFLViolation(SolverError):
    """Step rejected; carries an advisory dt that satisfies the limit."""

    def __init__(self, message, advisory_dt):
        super().__init__(message)
        self.advisory_dt = advisory_dt


class IntegrationAborted(SolverError):
    """Non-finite values appeared; carries the last valid state."""

    def __init__(self, message, last_state):
        super().__init__(message)
        self.last_state = last_state


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    cfl_limit: float = 0.8
    adaptive: bool = False
    safety: float = 0.25
    c_m: float = 1.0
    max_horizon: float = 1e9
    max_dt: float = 0.05

    def __post_init__(self):
        if self.dt <= 0:
            raise SolverError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class SolverState:
    u: PeriodicField
    t: float = 0.0
    step_count: int = 0
    dt: float = 1e-3
    config: SolverConfig = field(default_factory=SolverConfig)
    dissipation: float = 0.0  # accumulated integral of the squared gradient norm


def _spec_weights(n: int) -> np.ndarray:
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    return w


def _grad_energy_spec(spec: np.ndarray, grid: Grid) -> float:
    w = _spec_weights(grid.n)
    total = np.sum(w * grid.k_sq * np.abs(spec) ** 2)
    return float(total * grid.h**3 / grid.n**3)


def _nonlinear(spec: np.ndarray, grid: Grid) -> np.ndarray:
    """Projected, dealiased rotation-form tendency u x omega in spectral space."""
    mask = grid.dealias_mask
    sd = spec * mask
    u = _fft.irfftn(sd, s=(grid.n,) * 3, axes=(1, 2, 3))
    wx = 1j * (grid.ky * sd[2] - grid.kz * sd[1])
    wy = 1j * (grid.kz * sd[0] - grid.kx * sd[2])
    wz = 1j * (grid.kx * sd[1] - grid.ky * sd[0])
    w = _fft.irfftn(np.stack([wx, wy, wz]), s=(grid.n,) * 3, axes=(1, 2, 3))
    cross = np.stack(
        [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ]
    )
    out = _fft.rfftn(cross, axes=(1, 2, 3)) * mask
    out = leray_project(out, grid)
    out[:, 0, 0, 0] = 0.0  # mean momentum is conserved exactly with zero forcing
    return out


def nonlinear_tendency(u: PeriodicField) -> PeriodicField:
    """Physical-space projected nonlinear tendency (diagnostic)."""
    return PeriodicField.from_spectral(u.grid, _nonlinear(u.spectral, u.grid))


def step(state: SolverState, dt: float | None = None) -> SolverState:
    """One integrating-factor RK4 step.

    Raises CFLViolation when max|u| dt / h exceeds the configured limit and
    IntegrationAborted when non-finite values appear.
    """
    grid = state.u.grid
    cfg = state.config
    dt = state.dt if dt is None else float(dt)
    umax = sup_norm(state.u)
    if umax > 0:
        cfl = umax * dt / grid.h
        if cfl > cfg.cfl_limit:
            raise CFLViolation(
                f"CFL number {cfl:.3g} exceeds limit {cfg.cfl_limit:.3g}",
                advisory_dt=cfg.cfl_limit * grid.h / umax,
            )
    spec = state.u.spectral
    e_half = np.exp(-grid.k_sq * (dt / 2.0))
    e_full = e_half * e_half

    n1 = _nonlinear(spec, grid)
    g1 = _grad_energy_spec(spec, grid)
    s2 = e_half * (spec + (dt / 2.0) * n1)
    n2 = _nonlinear(s2, grid)
    g2 = _grad_energy_spec(s2, grid)
    s3 = e_half * spec + (dt / 2.0) * n2
    n3 = _nonlinear(s3, grid)
    g3 = _grad_energy_spec(s3, grid)
    s4 = e_full * spec + dt * e_half * n3
    n4 = _nonlinear(s4, grid)
    g4 = _grad_energy_spec(s4, grid)

    new_spec = e_full * spec + (dt / 6.0) * (e_full * n1 + 2.0 * e_half * n2 + 2.0 * e_half * n3 + n4)
    if not np.all(np.isfinite(new_spec)):
        raise IntegrationAborted("non-finite spectral coefficients after step", last_state=state)
    new_u = PeriodicField.from_spectral(grid, new_spec)
    diss = state.dissipation + (dt / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4)
    return replace(
        state,
        u=new_u,
        t=state.t + dt,
        step_count=state.step_count + 1,
        dt=dt,
        dissipation=diss,
    )


def divergence_residual(state: SolverState) -> tuple[float, float]:
    """(sup |div u|, sup over the nine velocity partials) for invariant checks."""
    from .grid import MultiIndex, spectral_derivative

    div_sup = float(np.max(np.abs(divergence(state.u))))
    grad_sup = 0.0
    for axis in range(3):
        d = spectral_derivative(state.u, MultiIndex.along_axis(1, axis))
        grad_sup = max(grad_sup, sup_norm(d))
    return div_sup, grad_sup


def analyticity_timespan(sup_norm_u: float, c_m: float, max_horizon: float = 1e9) -> float:
    """Local smoothing window 1/(c_m^2 sup^2); zero sup returns the configured cap."""
    if c_m <= 0:
        raise SolverError(f"c_m must be positive, got {c_m}")
    if sup_norm_u < 0:
        raise SolverError(f"sup norm must be non-negative, got {sup_norm_u}")
    if sup_norm_u == 0:
        return max_horizon
    return min(1.0 / (c_m**2 * sup_norm_u**2), max_horizon)


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------

def _project_field(f: PeriodicField) -> PeriodicField:
    return PeriodicField.from_spectral(f.grid, leray_project(f.spectral, f.grid))


def init_field(kind: str, grid: Grid, **params) -> PeriodicField:
    """Divergence-free initial condition of the requested family.

    Kinds: abc (A sin x3 + C cos x2, ...), taylor_green, kida (high-symmetry
    single-mode vorticity configuration, normalized so the vorticity sup-norm
    is 1; formula in docs/notes.md), random_bandlimited (seeded Gaussian modes
    with |kappa| <= kappa_cut projected onto divergence-free space).
    """
    X, Y, Z = grid.meshgrid()
    if kind == "abc":
        a = float(params.pop("a", 1.0))
        b = float(params.pop("b", 1.0))
        c = float(params.pop("c", 1.0))
        _reject_unknown(kind, params)
        f = PeriodicField.from_components(
            grid,
            a * np.sin(Z) + c * np.cos(Y),
            b * np.sin(X) + a * np.cos(Z),
            c * np.sin(Y) + b * np.cos(X),
        )
    elif kind == "taylor_green":
        amp = float(params.pop("amplitude", 1.0))
        _reject_unknown(kind, params)
        f = PeriodicField.from_components(
            grid,
            amp * np.sin(X) * np.cos(Y) * np.cos(Z),
            -amp * np.cos(X) * np.sin(Y) * np.cos(Z),
            np.zeros_like(X),
        )
    elif kind == "kida":
        _reject_unknown(kind, params)
        u1 = np.sin(X) * (np.cos(3 * Y) * np.cos(Z) - np.cos(Y) * np.cos(3 * Z))
        u2 = np.sin(Y) * (np.cos(3 * Z) * np.cos(X) - np.cos(Z) * np.cos(3 * X))
        u3 = np.sin(Z) * (np.cos(3 * X) * np.cos(Y) - np.cos(X) * np.cos(3 * Y))
        f = PeriodicField.from_components(grid, u1, u2, u3)
        w_sup = sup_norm(curl(f))
        f = f * (1.0 / w_sup)
    elif kind == "random_bandlimited":
        seed = int(params.pop("seed", 0))
        kappa_cut = int(params.pop("kappa_cut", max(2, grid.n // 8)))
        amp = float(params.pop("amplitude", 1.0))
        _reject_unknown(kind, params)
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal((3, grid.n, grid.n, grid.n))
        spec = _fft.rfftn(noise, axes=(1, 2, 3))
        scale = 2.0 * math.pi / grid.length
        keep = grid.k_sq <= (kappa_cut * scale) ** 2 + 1e-12
        keep = keep & (grid.k_sq > 0)
        spec = spec * keep
        f = PeriodicField.from_spectral(grid, spec)
        f = _project_field(f)
        s = sup_norm(f)
        if s > 0:
            f = f * (amp / s)
        return _assert_solenoidal(_project_field(f))
    else:
        raise SolverError(f"unknown initial condition kind: {kind!r}")
    return _assert_solenoidal(_project_field(f))


def _reject_unknown(kind, params):
    if params:
        raise SolverError(f"unknown parameters for {kind!r}: {sorted(params)}")


def _assert_solenoidal(f: PeriodicField) -> PeriodicField:
    div_sup = float(np.max(np.abs(divergence(f))))
    scale = max(sup_norm(f), 1.0)
    if div_sup > 1e-10 * scale * f.grid.k_nyquist:
        raise SolverError(f"construction is not divergence-free: sup|div u| = {div_sup:.3g}")
    return f


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Sampled norm histories plus the accumulated dissipation integral."""

    times: np.ndarray
    sup_u: np.ndarray
    l2_u: np.ndarray
    sup_w: np.ndarray
    grad_sq: np.ndarray
    dissipation: np.ndarray
    dk_sup: dict[int, np.ndarray]
    k_list: tuple[int, ...]
    failed: bool = False
    failure: str = ""

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0) and len(self.times) > 1:
            raise SolverError("trajectory times must be strictly increasing")


def run(
    u0: PeriodicField,
    t_end: float,
    config: SolverConfig | None = None,
    sample_interval: float | None = None,
    k_list: tuple[int, ...] = (),
    all_multi_indices: bool = False,
    callback=None,
) -> Trajectory:
    """Integrate to t_end, sampling diagnostics every sample_interval.

    In adaptive mode dt is min(CFL dt, safety * local smoothing window).
    Step failures yield a partial trajectory with the failure marker set.
    ``callback(state, row_index)`` fires at every sample (snapshots etc.).
    """
    cfg = config or SolverConfig()
    state = SolverState(u=u0, dt=cfg.dt, config=cfg)
    interval = cfg.dt if sample_interval is None else float(sample_interval)
    if interval < cfg.dt:
        interval = cfg.dt

    rows = {
        "times": [],
        "sup_u": [],
        "l2_u": [],
        "sup_w": [],
        "grad_sq": [],
        "dissipation": [],
    }
    dk_rows = {k: [] for k in k_list}

    def sample(st: SolverState):
        rows["times"].append(st.t)
        rows["sup_u"].append(sup_norm(st.u))
        rows["l2_u"].append(lp_norm(st.u, 2))
        rows["sup_w"].append(sup_norm(curl(st.u)))
        rows["grad_sq"].append(_grad_energy_spec(st.u.spectral, st.u.grid))
        rows["dissipation"].append(st.dissipation)
        for k in k_list:
            dk_rows[k].append(derivative_sup_norm(st.u, k, all_multi_indices=all_multi_indices))
        if callback is not None:
            callback(st, len(rows["times"]) - 1)

    sample(state)
    failed = False
    failure = ""
    sample_index = 1
    eps = 1e-12
    while state.t < t_end - eps:
        next_sample = min(sample_index * interval, t_end)
        if cfg.adaptive:
            umax = sup_norm(state.u)
            dt = cfg.max_dt
            if umax > 0:
                dt = min(
                    cfg.cfl_limit * state.u.grid.h / umax,
                    cfg.safety * analyticity_timespan(umax, cfg.c_m, cfg.max_horizon),
                    cfg.max_dt,
                )
        else:
            dt = cfg.dt
        dt = min(dt, next_sample - state.t)
        try:
            state = step(state, dt)
        except SolverError as exc:
            failed = True
            failure = str(exc)
            break
        if state.t >= next_sample - eps:
            sample(state)
            while sample_index * interval <= state.t + eps:
                sample_index += 1

    return Trajectory(
        times=np.array(rows["times"]),
        sup_u=np.array(rows["sup_u"]),
        l2_u=np.array(rows["l2_u"]),
        sup_w=np.array(rows["sup_w"]),
        grad_sq=np.array(rows["grad_sq"]),
        dissipation=np.array(rows["dissipation"]),
        dk_sup={k: np.array(v) for k, v in dk_rows.items()},
        k_list=tuple(k_list),
        failed=failed,
        failure=failure,
    )


def energy_budget(tr: Trajectory, method: str = "accumulated") -> np.ndarray:
    """Residual series ||u0||_2^2 - ||u(t)||_2^2 - 2 * integral of ||grad u||_2^2.

    ``accumulated`` uses the stepper's 4th-order dissipation integral;
    ``trapezoid`` re-integrates the sampled gradient norms (for bare series).
    """
    if len(tr.times) < 2:
        raise SolverError("energy budget needs at least two samples")
    e0 = tr.l2_u[0] ** 2
    if method == "accumulated":
        integral = tr.dissipation
    elif method == "trapezoid":
        integral = np.concatenate(
            [[0.0], np.cumsum(0.5 * (tr.grad_sq[1:] + tr.grad_sq[:-1]) * np.diff(tr.times))]
        )
    else:
        raise SolverError(f"unknown energy budget method {method!r}")
    return e0 - tr.l2_u**2 - 2.0 * integral
