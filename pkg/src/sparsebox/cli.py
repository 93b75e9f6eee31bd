"""Command-line interface.

Subcommands: run (full pipeline), analyze (diagnostics on one snapshot),
sparseness (single class-membership query), chains (re-label a trajectory),
harmonic (tuning/extremal/MC queries), table (scaling-gap table). All flags
are long-form and all output rows are emitted in deterministic order.
Exit codes: 0 success, 1 runtime/file errors, 2 usage errors.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import chains as chainmod
from .config import ConfigError, parse_config
from .grid import MultiIndex, spectral_derivative, sup_norm, lp_norm, curl
from .harmonic import (
    ExclusionInputs,
    HarmonicError,
    exclusion_lhs,
    extremal_arcs,
    extremal_h,
    mc_harmonic_measure,
    solve_tuning_pair,
)
from .pipeline import run_pipeline
from .snapshot import SnapshotError, load_snapshot
from .sparseness import (
    SparsenessError,
    SparsenessParams,
    scale_of_sparseness,
    z_alpha_check,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsebox",
        description="periodic-box flow solver with level-set sparseness diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the full pipeline from a config file")
    p_run.add_argument("--config", required=True, help="path to a key = value config file")
    p_run.add_argument("--output", default=None, help="override the output directory")

    p_an = sub.add_parser("analyze", help="norms and sparseness diagnostics on one snapshot")
    p_an.add_argument("snapshot", help="snapshot file")
    p_an.add_argument("--k", type=int, default=0, help="derivative order (first axis)")
    p_an.add_argument("--lambda", dest="lam", type=float, default=0.4503474256843126)
    p_an.add_argument("--delta", type=float, default=0.75)
    p_an.add_argument("--c0", type=float, default=2.0)
    p_an.add_argument("--alpha", type=float, default=None, help="default: 1/(k+1)")
    p_an.add_argument("--mode", choices=("vol", "1d"), default="vol")
    p_an.add_argument("--subsample", type=int, default=4096)

    p_sp = sub.add_parser("sparseness", help="single class-membership query on a snapshot")
    p_sp.add_argument("snapshot", help="snapshot file")
    p_sp.add_argument("--lambda", dest="lam", type=float, required=True)
    p_sp.add_argument("--delta", type=float, required=True)
    p_sp.add_argument("--c0", type=float, required=True)
    p_sp.add_argument("--alpha", type=float, required=True)
    p_sp.add_argument("--k", type=int, required=True)
    p_sp.add_argument("--mode", choices=("vol", "1d"), default="vol")
    p_sp.add_argument("--subsample", type=int, default=4096)

    p_ch = sub.add_parser("chains", help="re-label chain diagnostics from a trajectory CSV")
    p_ch.add_argument("trajectory", help="trajectory or chain-values CSV")
    p_ch.add_argument("--c", type=float, default=0.9, help="chain constant")
    p_ch.add_argument("--ell0", type=int, default=1)
    p_ch.add_argument("--q", type=int, default=2)

    p_h = sub.add_parser("harmonic", help="tuning, extremal and Monte Carlo queries")
    p_h.add_argument("--delta", type=float, default=None, help="solve the tuning pair")
    p_h.add_argument("--extremal-lambda", type=float, default=None, help="closed-form value")
    p_h.add_argument("--mc-lambda", type=float, default=None, help="MC on the extremal arcs")
    p_h.add_argument("--walkers", type=int, default=100000)
    p_h.add_argument("--seed", type=int, default=0)
    p_h.add_argument("--exclusion-k", type=int, default=None)
    p_h.add_argument("--exclusion-c", type=float, default=0.9)
    p_h.add_argument("--mu", type=float, default=1.0)
    p_h.add_argument("--epsilon", type=float, default=0.1)
    p_h.add_argument("--ell", type=int, default=1)

    p_t = sub.add_parser("table", help="scaling-gap table")
    p_t.add_argument("--k", default="0..8", help="order range, e.g. 0..8 or 3")
    return parser


def _cmd_run(args) -> int:
    try:
        text = open(args.config, "r", encoding="utf-8").read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    result = run_pipeline(cfg, output_dir=args.output)
    for name in sorted(result.artifacts):
        print(f"{name}: {result.artifacts[name]}")
    for err in result.errors:
        print(f"error: {err}", file=sys.stderr)
    return result.exit_code


def _load(path):
    try:
        return load_snapshot(path)
    except (OSError, SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _cmd_analyze(args) -> int:
    loaded = _load(args.snapshot)
    if loaded is None:
        return 1
    f, meta = loaded
    print(f"n = {meta.n}")
    print(f"role = {meta.role}")
    print(f"t = {meta.t:.17g}")
    print(f"sup_u = {sup_norm(f):.17g}")
    print(f"l2_u = {lp_norm(f, 2):.17g}")
    print(f"sup_w = {sup_norm(curl(f)):.17g}")
    k = args.k
    alpha = args.alpha if args.alpha is not None else 1.0 / (k + 1.0)
    try:
        dku = f if k == 0 else spectral_derivative(f, MultiIndex.along_axis(k))
        print(f"sup_D{k} = {sup_norm(dku):.17g}")
        params = SparsenessParams(args.lam, args.delta, args.c0, alpha)
        rep = z_alpha_check(dku, params, mode=args.mode, sample=args.subsample or "all")
        print(f"zalpha_verdict = {str(rep.verdict).lower()}")
        print(f"fraction_passing = {rep.fraction_passing:.17g}")
        scales = scale_of_sparseness(
            dku, args.lam, args.delta, mode=args.mode, sample=args.subsample or "all"
        )
        print(f"rho_star = {scales.rho_global:.17g}")
    except SparsenessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _cmd_sparseness(args) -> int:
    loaded = _load(args.snapshot)
    if loaded is None:
        return 1
    f, _ = loaded
    try:
        dku = f if args.k == 0 else spectral_derivative(f, MultiIndex.along_axis(args.k))
        params = SparsenessParams(args.lam, args.delta, args.c0, args.alpha)
        rep = z_alpha_check(dku, params, mode=args.mode, sample=args.subsample or "all")
    except SparsenessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"verdict = {str(rep.verdict).lower()}")
    print(f"fraction_passing = {rep.fraction_passing:.17g}")
    print(f"rho_star = {rep.rho_star:.17g}")
    interval = rep.admissible_c_interval()
    if interval is None:
        print("admissible_c = none")
    else:
        print(f"admissible_c = [{interval[0]:.17g}, {interval[1]:.17g}]")
    print(f"unresolved_c = {rep.unresolved_c_count}")
    return 0


def _cmd_chains(args) -> int:
    try:
        lines = open(args.trajectory, "r", encoding="utf-8").read().splitlines()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rows = [l for l in lines if l and not l.startswith("#")]
    if not rows:
        print("error: empty trajectory", file=sys.stderr)
        return 1
    header = rows[0].split(",")
    try:
        t_i = header.index("t")
        j_i = header.index("j")
        sup_i = header.index("sup_Dj")
    except ValueError:
        print("error: expected chain-values columns t, j, sup_Dj", file=sys.stderr)
        return 1
    per_t: dict[float, dict[int, float]] = {}
    for line in rows[1:]:
        parts = line.split(",")
        per_t.setdefault(float(parts[t_i]), {})[int(parts[j_i])] = float(parts[sup_i])
    print("t,kind,lo,hi,maximizer,label")
    for t in sorted(per_t):
        orders = per_t[t]
        j_max = max(orders)
        sups = np.array([orders.get(j, 0.0) for j in range(j_max + 1)])
        try:
            chain = chainmod.ChainState.from_sup_norms(sups, args.c, t)
            ladder = chainmod.build_section_ladder(args.ell0, j_max, q=args.q, c_start=args.c)
            labeled = chainmod.label_sections(chain, ladder)
        except chainmod.ChainError as exc:
            print(f"error: t={t:.17g}: {exc}", file=sys.stderr)
            return 1
        for s in labeled.sections:
            print(f"{t:.17g},section,{s.lo},{s.hi},{s.maximizer},{s.label}")
        for s in labeled.strings:
            print(f"{t:.17g},string,{s.lo},{s.hi},,{s.label}")
    return 0


def _cmd_harmonic(args) -> int:
    did = False
    try:
        if args.delta is not None:
            pair = solve_tuning_pair(args.delta)
            print(
                f"delta = {pair.delta:.17g} -> h = {pair.h:.17g}, lambda = {pair.lam:.17g}, "
                f"constraint_ok = {str(pair.constraint_ok).lower()}"
            )
            did = True
        if args.extremal_lambda is not None:
            print(
                f"extremal_h({args.extremal_lambda:.17g}) = {extremal_h(args.extremal_lambda):.17g}"
            )
            did = True
        if args.mc_lambda is not None:
            arcs = extremal_arcs(args.mc_lambda)
            est = mc_harmonic_measure(arcs, 0j, args.walkers, seed=args.seed)
            print(
                f"mc_h({args.mc_lambda:.17g}) = {est.estimate:.17g} +- {est.stderr:.17g} "
                f"(exact {extremal_h(args.mc_lambda):.17g}, n = {est.n_walkers})"
            )
            did = True
        if args.exclusion_k is not None:
            pair = solve_tuning_pair(args.delta if args.delta is not None else 0.75)
            inputs = ExclusionInputs(
                lam=pair.lam, delta=pair.delta, k=args.exclusion_k,
                c=args.exclusion_c, mu=args.mu, eps=args.epsilon, ell=args.ell,
            )
            value, satisfied = exclusion_lhs(inputs)
            print(
                f"exclusion[k={args.exclusion_k}]: eta = {inputs.eta:.17g}, "
                f"h_star = {inputs.h_star:.17g}, lhs = {value:.17g}, "
                f"mu = {args.mu:.17g}, satisfied = {str(satisfied).lower()}"
            )
            did = True
    except HarmonicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not did:
        print("error: nothing to do (pass --delta, --extremal-lambda, --mc-lambda "
              "or --exclusion-k)", file=sys.stderr)
        return 1
    return 0


def _cmd_table(args) -> int:
    spec = args.k
    try:
        if ".." in spec:
            lo, hi = spec.split("..")
            k_values = range(int(lo), int(hi) + 1)
        else:
            k_values = [int(spec)]
        rows = chainmod.scaling_gap_table(k_values)
    except (ValueError, chainmod.ChainError) as exc:
        print(f"error: bad order range {spec!r}: {exc}", file=sys.stderr)
        return 1
    print("k,regularity,apriori,energy,gap_ratio,vorticity_regularity,vorticity_apriori")
    for r in rows:
        print(
            f"{r.k},{r.regularity:.17g},{r.apriori:.17g},{r.energy:.17g},"
            f"{r.gap_ratio:.17g},{r.vorticity_regularity:.17g},{r.vorticity_apriori:.17g}"
        )
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "analyze": _cmd_analyze,
    "sparseness": _cmd_sparseness,
    "chains": _cmd_chains,
    "harmonic": _cmd_harmonic,
    "table": _cmd_table,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
