#!/usr/bin/env python3
"""Aperture dichotomy walkthrough.

Builds the four-child Cantor-type measure and evaluates the squared L2 norm
of the conical square function of the constant function, generation by
generation, for apertures 1, 1.5 and 2.  At aperture 1 the per-generation
terms decay like (n+1)^-2 and the partial sums converge; at any wider
aperture the cone reaches across the separation gap into the heavy outer
children, the terms only decay like 1/(C(n+1)), and the partial sums track
a divergent harmonic series.
"""

import numpy as np

from nhsq import (
    CantorParams,
    CantorSquareContext,
    ConeSpec,
    QuadratureConfig,
    build_cantor,
    conical_norm_series,
    validate_collapse,
)

M, C, N = 0.4, 16.0, 40

measure = build_cantor(CantorParams(m=M, C=C, depth=N + 2))
quad = QuadratureConfig(t_steps_per_band=32, y_resolution_depth=6,
                        rel_tol=1e-3, trunc_generation=N)
ctx = CantorSquareContext(measure, quad)

print(f"measure: m={M}, C={C}, truncated at generation {N + 2}")
print(f"bump mass constant beta(n) ranges over "
      f"[{min(ctx.beta(n) for n in range(N + 1)):.4f}, "
      f"{max(ctx.beta(n) for n in range(N + 1)):.4f}]")
print()

series = {}
for alpha in (1.0, 1.5, 2.0):
    series[alpha] = conical_norm_series(measure, ConeSpec(alpha, M), N, quad, context=ctx)

print(f"{'n':>4} {'g(n,1)*(n+1)^2':>16} {'g(n,2)*C(n+1)':>16} "
      f"{'P_n(1)':>12} {'P_n(2)':>12}")
p1 = series[1.0].partial_sums
p2 = series[2.0].partial_sums
for n in (0, 2, 5, 10, 20, 30, 40):
    g1 = series[1.0].terms[n] * (n + 1) ** 2
    g2 = series[2.0].terms[n] * C * (n + 1)
    print(f"{n:>4} {g1:>16.6f} {g2:>16.6f} {p1[n]:>12.6f} {p2[n]:>12.6f}")

print()
print("alpha = 1: normalized terms are flat in (n+1)^-2 units -> convergent.")
print("alpha = 2: normalized terms are flat in 1/(C(n+1)) units -> the")
print("           partial sums grow like a harmonic series without bound.")
print()
tail = p1[40] - p1[20]
print(f"aperture-1 tail P_40 - P_20 = {tail:.3e} "
      f"(bounded by the quadratic-decay envelope)")
for n0 in (8, 16):
    c_fit = (p2[2 * n0] - p2[n0]) * C / np.log(2.0)
    print(f"aperture-2 doubling increment, N={n0:>2}: fitted c = {c_fit:.4f}")

worst = max(
    validate_collapse(build_cantor(CantorParams(m=M, C=C, depth=9)),
                      ConeSpec(a, M), 3, QuadratureConfig(32, 6, 1e-3, 3))
    for a in (1.0, 1.5, 2.0)
)
print(f"\ncollapsed vs brute-force 4^n enumeration (n <= 3): "
      f"worst relative difference {worst:.2e}")
