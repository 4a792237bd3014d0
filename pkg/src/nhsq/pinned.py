"""Regression-pinned constants.

The underlying theory guarantees finiteness but no specific magnitudes, so
these were recorded from the first calibration run (default parameters
m = 0.4, C = 16, root seed 20250808) with a few percent headroom.  Re-runs
must never exceed them; deterministic seeding makes a violation a real
regression, not noise.
"""

# integral of phi_I dmu / mu(I), lower bound over generations 0..40 (c0).
BUMP_MASS_LOWER = 0.119

# max over n <= 40 of g(n, 1) * (n+1)^2: the aperture-1 series tail constant.
APERTURE1_TAIL_K = 2.07e-4

# max over computed generations of g(n, 2) / g_V(n): termwise domination.
ALPHA2_OVER_VERTICAL = 0.700

# max ||S f||^2 / ||f||^2 over f = 1 and 20 random +-1 leaf vectors, depth 5.
L2_RATIO_MAX = 3.30e-4

# growth_constant over 1e5 samples at depth 7 (paper guarantees only <= 4).
GROWTH_MAX = 1.20

# worst size / Hoelder condition ratios over 1e4 stratified samples.
SIZE_RATIO_CANTOR = 14.5
HOLDER_RATIO_CANTOR = 3.00
SIZE_RATIO_LOGPRODUCT = 4.60
HOLDER_RATIO_LOGPRODUCT = 11.0

# sup over dyadic I to depth 12 of C_I / len(I), demo profile, N in {2,3,4}.
CI_SUP_MAX = 0.4249

# Cantor-kernel testing functional over construction cubes to depth 6, N = 12.
TB_CANTOR_SUP = 4.20e-3

# sup_lambda lambda mu{S f > lambda} / ||f||_1 over 10 spike locations.
WEAK11_MAX = 0.0320

# martingale energy ratio over 20 random leaf vectors (b = 1 and flip systems).
ENERGY_RATIO_MAX = 2.50
