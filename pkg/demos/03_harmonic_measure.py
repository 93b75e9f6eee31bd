"""Harmonic-measure toolbox: closed forms, tuning, and two Monte Carlo routes.

The extremal configuration is a pair of slits attached to the ends of the
diameter. Its harmonic measure at the origin has an arcsin closed form; we
check it two independent ways (boundary-arc walkers and slit-absorbing
walkers), solve the tuning relation, and scan the blow-up-exclusion
inequality in its constant.
"""
import math

import numpy as np

import sparsebox as sb

print("extremal harmonic measure h(lam) and the tuning pair lam(delta):")
print(f"{'lam':>6} {'h(lam)':>10}    {'delta':>6} {'lam(delta)':>11} {'ok':>4}")
for lam, delta in ((0.1, 0.6), (0.25, 0.75), (0.5, 0.9)):
    pair = sb.solve_tuning_pair(delta)
    print(f"{lam:6.2f} {sb.extremal_h(lam):10.6f}    {delta:6.2f} "
          f"{pair.lam:11.6f} {str(pair.constraint_ok):>5}")

print("\nthe anchor case delta = 3/4:")
pair = sb.solve_tuning_pair(0.75)
print(f"  h = {pair.h:.10f}, lam = {pair.lam:.10f} > 1/3, "
      f"residual = {pair.residual:.1e}")

print("\nMonte Carlo vs closed form at the disk center (n = 100000):")
print(f"{'lam':>6} {'closed form':>12} {'arc walkers':>12} {'slit walkers':>13}")
for lam in (0.1, 0.25, 0.5):
    exact = sb.extremal_h(lam)
    arcs = sb.mc_harmonic_measure(sb.extremal_arcs(lam), 0j, 100000, seed=2024)
    slits = sb.mc_harmonic_measure_slits(sb.extremal_slits(lam), 0j, 20000, seed=7)
    print(f"{lam:6.2f} {exact:12.5f} {arcs.estimate:12.5f} {slits.estimate:13.5f}")

print("\nextremality: random segment sets of the same measure always dominate")
rng = np.random.default_rng(1)
lam = 0.25
for trial in range(5):
    left = float(rng.uniform(0.05, 2 * lam - 0.05))
    segs = sb.SegmentSet(((-1.0, -1.0 + left), (1.0 - (2 * lam - left), 1.0)))
    est = sb.mc_harmonic_measure_slits(segs, 0j, 10000, seed=trial)
    print(f"  split {left:.3f}/{2*lam - left:.3f}: h ~ {est.estimate:.4f} "
          f">= extremal {sb.extremal_h(lam):.4f}")

print("\nmajorization bound m*h + M*(1-h) with the tuned pair (m = lam M):")
big_m = 2.0
print(f"  bound = {sb.majorize(pair.lam * big_m, big_m, pair.h):.6f} "
      f"= 2 lam M = {2 * pair.lam * big_m:.6f}")

print("\nblow-up-exclusion left-hand side as the chain constant varies (k = 4):")
print(f"{'c':>10} {'lhs':>12} {'<= mu=1':>8}")
for c in (1e-12, 1e-9, 1e-6, 1e-4, 1e-2):
    inputs = sb.ExclusionInputs(lam=pair.lam, delta=0.75, k=4, c=c, mu=1.0, eps=0.1, ell=2)
    value, satisfied = sb.exclusion_lhs(inputs)
    print(f"{c:10.0e} {value:12.5g} {str(satisfied):>8}")
inputs = sb.ExclusionInputs(lam=pair.lam, delta=0.75, k=4, c=1e-12, mu=1.0, eps=0.1, ell=2)
print(f"  derived constants: eta = {inputs.eta:.6f}, h* = {inputs.h_star:.6f}, "
      f"2e/eta = {2*math.e/inputs.eta:.1f}")
