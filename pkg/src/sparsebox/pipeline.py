"""Pipeline orchestration: simulate -> snapshot -> diagnose -> report.

Every artifact embeds the resolved configuration (inline copy + SHA-256) so a
run directory is a self-describing experiment record. All rows are emitted in
a fixed order and floats are serialized with 17 significant digits: identical
configs produce byte-identical artifacts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import chains as chainmod
from .config import RunConfig, config_hash, serialize_config
from .grid import (
    MultiIndex,
    PeriodicField,
    curl,
    derivative_sup_norm,
    grid_for,
    lp_norm,
    spectral_derivative,
    sup_norm,
)
from .harmonic import ExclusionInputs, default_ell, exclusion_lhs, solve_tuning_pair
from .snapshot import save_snapshot
from .solver import SolverConfig, Trajectory, energy_budget, init_field, run
from .sparseness import (
    SparsenessParams,
    all_superlevel_masks,
    scale_of_sparseness,
    z_alpha_check,
)
from .svgplot import LinePlot

SCHEMA_PREFIX = "sparsebox"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: Path, schema: str, columns, rows, cfg_text: str, cfg_sha: str):
    lines = [f"# schema = {SCHEMA_PREFIX}-{schema}-v1", f"# config_sha256 = {cfg_sha}"]
    lines += [f"# cfg: {line}" for line in cfg_text.rstrip("\n").split("\n")]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class PipelineResult:
    exit_code: int
    output_dir: Path
    artifacts: dict[str, Path] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    trajectory: Trajectory | None = None


def _ic_params(cfg: RunConfig) -> dict:
    if cfg.ic == "abc":
        return {"a": cfg.abc_a, "b": cfg.abc_b, "c": cfg.abc_c}
    if cfg.ic == "taylor_green":
        return {"amplitude": cfg.ic_amplitude}
    if cfg.ic == "random_bandlimited":
        return {
            "seed": cfg.ic_seed,
            "kappa_cut": cfg.ic_kappa_cut,
            "amplitude": cfg.ic_amplitude,
        }
    return {}


def _zalpha_verdict(report, masks, delta: float) -> str:
    if report.unresolved_c_count == len(report.c_values):
        return "unresolved"
    if report.verdict:
        return "true"
    if max(m.fraction for m in masks) > delta:
        return "false-trivial"
    return "false"


def run_pipeline(cfg: RunConfig, output_dir=None) -> PipelineResult:
    """Execute the full pipeline; nonzero exit code on any module error."""
    outdir = Path(output_dir if output_dir is not None else cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "snapshots").mkdir(exist_ok=True)
    result = PipelineResult(exit_code=0, output_dir=outdir)

    cfg_text = serialize_config(cfg)
    cfg_sha = config_hash(cfg)
    resolved = outdir / "config.resolved.txt"
    resolved.write_text(cfg_text + f"# config_sha256 = {cfg_sha}\n", encoding="utf-8")
    result.artifacts["config"] = resolved

    grid = grid_for(cfg.n, cfg.box_length)
    u0 = init_field(cfg.ic, grid, **_ic_params(cfg))

    sup0 = sup_norm(u0)
    j_max = cfg.k_max
    ell0 = cfg.ladder_ell0 or min(4, default_ell(sup0, cfg.epsilon))
    ell0 = max(1, min(ell0, j_max // 2))
    ladder = chainmod.build_section_ladder(
        ell0, j_max, q=cfg.ladder_q, c_start=cfg.chain_c, c_decay=cfg.chain_c_decay
    )

    sample_only = cfg.subsample if cfg.subsample > 0 else "all"
    diag_rows = []
    chain_rows = []
    label_rows = []
    snapshot_index = [0]
    next_diag = [0.0]
    eps = 1e-9

    def diagnos(state, row_index):
        t = state.t
        if t + eps < next_diag[0] and not math.isclose(t, cfg.t_end, abs_tol=eps):
            return
        next_diag[0] = (math.floor(t / cfg.diag_interval + eps) + 1) * cfg.diag_interval
        snap_path = outdir / "snapshots" / f"snap_{snapshot_index[0]:06d}.bin"
        save_snapshot(state.u, snap_path, role="velo", t=t)
        snapshot_index[0] += 1
        row = [t, sup_norm(state.u), lp_norm(state.u, 2), sup_norm(curl(state.u))]
        for k in cfg.k_list:
            try:
                dku = (
                    state.u
                    if k == 0
                    else spectral_derivative(state.u, MultiIndex.along_axis(k), k_max=cfg.k_max)
                )
                sup_dk = sup_norm(dku)
                r_k = chainmod.chain_value(k, cfg.chain_c, sup_dk)
                if sup_dk == 0.0:
                    row += [sup_dk, r_k, math.inf, "zero-field"]
                    continue
                params = SparsenessParams(cfg.lam, cfg.delta, cfg.c0, cfg.alpha_for(k))
                rep = z_alpha_check(
                    dku, params, mode=cfg.mode, sample=sample_only, m_dirs=cfg.m_dirs,
                    n_c_values=cfg.n_c_values,
                )
                masks = all_superlevel_masks(dku, cfg.lam)
                verdict = _zalpha_verdict(rep, masks, cfg.delta)
                scale_rep = scale_of_sparseness(
                    dku, cfg.lam, cfg.delta, mode=cfg.mode, n_scales=cfg.n_scales,
                    sample=sample_only, m_dirs=cfg.m_dirs,
                )
                row += [sup_dk, r_k, scale_rep.rho_global, verdict]
            except Exception as exc:  # aggregated with provenance
                result.errors.append(f"sparseness[k={k}, t={t:.6g}]: {exc}")
                row += [math.nan, math.nan, math.nan, "error"]
        diag_rows.append(row)
        try:
            sups = np.array(
                [
                    derivative_sup_norm(
                        state.u, j, all_multi_indices=cfg.all_multi_indices, k_max=cfg.k_max
                    )
                    for j in range(j_max + 1)
                ]
            )
            chain = chainmod.ChainState.from_sup_norms(sups, cfg.chain_c, t)
            for j in range(j_max + 1):
                chain_rows.append([t, j, sups[j], chain.values[j]])
            labeled = chainmod.label_sections(chain, ladder)
            for s in labeled.sections:
                label_rows.append(
                    [t, "section", s.lo, s.hi, s.constant, s.maximizer, s.label]
                )
            for s in labeled.strings:
                label_rows.append([t, "string", s.lo, s.hi, "", "", s.label])
        except Exception as exc:
            result.errors.append(f"chains[t={t:.6g}]: {exc}")

    solver_cfg = SolverConfig(
        dt=cfg.dt,
        cfl_limit=cfg.cfl_limit,
        adaptive=cfg.adaptive,
        safety=cfg.safety,
        c_m=cfg.c_m,
        max_horizon=cfg.max_horizon,
        max_dt=cfg.max_dt,
    )
    tr = run(
        u0,
        cfg.t_end,
        solver_cfg,
        sample_interval=cfg.sample_interval,
        k_list=cfg.k_list,
        all_multi_indices=cfg.all_multi_indices,
        callback=diagnos,
    )
    result.trajectory = tr
    if tr.failed:
        result.errors.append(f"solver: {tr.failure}")

    # trajectory CSV (diagnostic rows)
    columns = ["t", "sup_u", "l2_u", "sup_w"]
    for k in cfg.k_list:
        columns += [f"sup_D{k}", f"R_{k}", f"rho_star_{k}", f"zalpha_{k}"]
    path = outdir / "trajectory.csv"
    write_csv(path, "trajectory", columns, diag_rows, cfg_text, cfg_sha)
    result.artifacts["trajectory"] = path

    # dense norm history
    norm_cols = ["t", "sup_u", "l2_u", "sup_w", "grad_sq", "dissipation", "energy_residual"]
    norm_cols += [f"sup_D{k}" for k in cfg.k_list]
    residuals = (
        energy_budget(tr) if len(tr.times) >= 2 else np.zeros(len(tr.times))
    )
    norm_rows = []
    for i in range(len(tr.times)):
        row = [
            tr.times[i],
            tr.sup_u[i],
            tr.l2_u[i],
            tr.sup_w[i],
            tr.grad_sq[i],
            tr.dissipation[i],
            residuals[i],
        ]
        row += [tr.dk_sup[k][i] for k in cfg.k_list]
        norm_rows.append(row)
    path = outdir / "norms.csv"
    write_csv(path, "norms", norm_cols, norm_rows, cfg_text, cfg_sha)
    result.artifacts["norms"] = path

    # chain values + labels sidecar
    path = outdir / "chain_values.csv"
    write_csv(path, "chain-values", ["t", "j", "sup_Dj", "R_j"], chain_rows, cfg_text, cfg_sha)
    result.artifacts["chain_values"] = path
    path = outdir / "chain_labels.csv"
    write_csv(
        path,
        "chain-labels",
        ["t", "kind", "lo", "hi", "constant", "maximizer", "label"],
        label_rows,
        cfg_text,
        cfg_sha,
    )
    result.artifacts["chain_labels"] = path

    # escape times on the dense series
    escape_rows = []
    try:
        series = {"sup_u": tr.sup_u}
        for k in cfg.k_list:
            series[f"sup_D{k}"] = tr.dk_sup[k]
        for name, vals in series.items():
            if len(vals) >= 2:
                for idx in chainmod.detect_escape_times(vals):
                    escape_rows.append([name, int(idx), tr.times[idx], vals[idx]])
    except Exception as exc:
        result.errors.append(f"escape-times: {exc}")
    path = outdir / "escape_times.csv"
    write_csv(path, "escape-times", ["series", "index", "t", "value"], escape_rows, cfg_text, cfg_sha)
    result.artifacts["escape_times"] = path

    # tuning / exclusion report
    try:
        pair = solve_tuning_pair(cfg.delta)
        ell = cfg.ladder_ell0 or default_ell(sup0, cfg.epsilon)
        lines = [
            f"# schema = {SCHEMA_PREFIX}-tuning-exclusion-v1",
            f"# config_sha256 = {cfg_sha}",
            f"delta = {pair.delta:.17g}",
            f"h = {pair.h:.17g}",
            f"lambda = {pair.lam:.17g}",
            f"constraint_ok = {str(pair.constraint_ok).lower()}",
            f"residual = {pair.residual:.17g}",
            f"knobs: epsilon = {cfg.epsilon:.17g}, ell = {ell}, c = {cfg.chain_c:.17g}, "
            f"mu = {cfg.mu:.17g}, kappa_dual = {cfg.kappa_dual:.17g}, m_star = {cfg.m_star:.17g}, "
            f"big_m = {cfg.big_m:.17g}",
        ]
        for k in cfg.k_list:
            if k < 1:
                continue
            inputs = ExclusionInputs(
                lam=cfg.lam, delta=cfg.delta, k=k, c=cfg.chain_c, mu=cfg.mu,
                eps=cfg.epsilon, ell=ell,
            )
            value, satisfied = exclusion_lhs(inputs)
            lines.append(
                f"exclusion[k={k}]: eta = {inputs.eta:.17g}, h_star = {inputs.h_star:.17g}, "
                f"lhs = {value:.17g}, mu = {cfg.mu:.17g}, satisfied = {str(satisfied).lower()}"
            )
        path = outdir / "tuning_exclusion.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        result.artifacts["tuning_exclusion"] = path
    except Exception as exc:
        result.errors.append(f"harmonic: {exc}")

    # exponent fits
    fit_rows = []
    t_col = np.array([row[0] for row in diag_rows]) if diag_rows else np.array([])
    for ki, k in enumerate(cfg.k_list):
        rho = np.array([row[4 + 4 * ki + 2] for row in diag_rows], dtype=np.float64)
        dk = np.array([row[4 + 4 * ki] for row in diag_rows], dtype=np.float64)
        try:
            fit = chainmod.alpha_fit(rho, dk)
            fit_rows.append(
                [k, fit.alpha, fit.coefficient, fit.r_squared, fit.n_used, fit.n_excluded, "ok"]
            )
        except chainmod.ChainError as exc:
            fit_rows.append([k, math.nan, math.nan, math.nan, 0, len(rho), str(exc)])
    path = outdir / "alpha_fit.csv"
    write_csv(
        path,
        "alpha-fit",
        ["k", "alpha_hat", "coefficient", "r_squared", "n_used", "n_excluded", "status"],
        fit_rows,
        cfg_text,
        cfg_sha,
    )
    result.artifacts["alpha_fit"] = path

    # plots
    try:
        plot = LinePlot("norm histories", "t", "norm")
        plot.add_series("sup_u", tr.times, tr.sup_u)
        plot.add_series("l2_u", tr.times, tr.l2_u)
        plot.add_series("sup_w", tr.times, tr.sup_w)
        (outdir / "norms.svg").write_text(plot.render(), encoding="utf-8")
        result.artifacts["norms_plot"] = outdir / "norms.svg"

        plot = LinePlot(
            "scale of sparseness vs derivative sup-norm", "sup_Dk", "rho_star",
            xlog=True, ylog=True,
        )
        for ki, k in enumerate(cfg.k_list):
            rho = [row[4 + 4 * ki + 2] for row in diag_rows]
            dk = [row[4 + 4 * ki] for row in diag_rows]
            plot.add_points(f"k={k}", dk, rho)
            for fr in fit_rows:
                if fr[0] == k and fr[6] == "ok" and fr[1] == fr[1]:
                    xs = [d for d, r in zip(dk, rho) if d > 0 and math.isfinite(r) and r > 0]
                    if len(xs) >= 2:
                        lo, hi = min(xs), max(xs)
                        plot.add_series(
                            f"fit k={k} (alpha={fr[1]:.3g})",
                            [lo, hi],
                            [fr[2] * lo ** -fr[1], fr[2] * hi ** -fr[1]],
                        )
        (outdir / "rho_star.svg").write_text(plot.render(), encoding="utf-8")
        result.artifacts["rho_star_plot"] = outdir / "rho_star.svg"

        rows = chainmod.scaling_gap_table(range(0, cfg.k_max + 1))
        plot = LinePlot("scaling-gap ratio", "k", "(k+1)/(k+3/2)")
        plot.add_series("gap ratio", [r.k for r in rows], [r.gap_ratio for r in rows])
        (outdir / "gap_ratio.svg").write_text(plot.render(), encoding="utf-8")
        result.artifacts["gap_ratio_plot"] = outdir / "gap_ratio.svg"
    except Exception as exc:
        result.errors.append(f"plots: {exc}")

    if result.errors:
        result.exit_code = 1
    return result
