import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhsq.dyadic import (
    Cube,
    GoodnessParams,
    ShiftedGrid,
    StoppingForest,
    build_stopping,
    carleson_packing,
    classify_good,
    estimate_pi_good,
    make_grid,
    martingale_decompose,
)
from nhsq.errors import (
    AccretivityViolated,
    CutoffBelowR,
    DivisionByNearZeroAverage,
    InvalidParams,
)
from nhsq.measures import CantorParams, LebesgueInterval, build_cantor

M = 0.4


@pytest.fixture(scope="module")
def grid():
    return ShiftedGrid(0, 8, (0,) * 8)


@pytest.fixture(scope="module")
def lebesgue():
    return LebesgueInterval(0.0, 1.0)


def test_make_grid_deterministic():
    g1 = make_grid(42, (0, 10))
    g2 = make_grid(42, (0, 10))
    assert g1.bits == g2.bits
    g3 = make_grid(43, (0, 64))
    assert g3.bits != make_grid(44, (0, 64)).bits  # 2^-64 collision odds


def test_zero_shift_is_standard_grid(grid):
    assert grid.cube_interval(Cube(3, 2)) == (0.25, 0.375)
    assert grid.containing_cube(0.3, 3) == Cube(3, 2)


def test_shift_formula():
    # sigma_i = sum over j > i of 2^-j w_j.
    g = ShiftedGrid(0, 4, (1, 0, 1, 1))
    # scale 1 shift: w_2/4 + w_3/8 + w_4/16 = 0 + 1/8 + 1/16
    a, b = g.cube_interval(Cube(1, 0))
    assert a == pytest.approx(1 / 8 + 1 / 16)
    assert b - a == 0.5


def test_nesting_under_shifts():
    g = make_grid(7, (0, 10))
    for i in (2, 5, 8):
        for k in (0, 3):
            c = Cube(i, k)
            for ch in g.children(c):
                assert g.contains(c, ch)
                assert g.parent(ch) == c


def test_whitney_regions_tile():
    # W_R = R x [len/2, len) over all cubes tile the strip; every (y, t)
    # lies in exactly one region.
    g = make_grid(21, (0, 12))
    rng = np.random.default_rng(5)
    for _ in range(300):
        y = rng.uniform(0.1, 0.9)
        t = math.exp(rng.uniform(math.log(2.0**-12), math.log(1.0)))
        hits = []
        for i in range(0, 13):
            ell = 2.0**-i
            if ell / 2 <= t < ell:
                cube = g.containing_cube(y, i)
                a, b = g.cube_interval(cube)
                assert a <= y < b
                hits.append(cube)
        assert len(hits) == 1


def test_goodness_params():
    p = GoodnessParams.from_exponents(M, 1.0)
    assert p.gamma == pytest.approx(1.0 / 2.8)
    assert 0 < p.gamma < 0.5
    assert 2.0 ** (p.r * (1 - p.gamma)) >= 3.0
    assert GoodnessParams.from_exponents(M, 1.0, ensure_positive=True).r >= p.r
    with pytest.raises(InvalidParams):
        GoodnessParams(gamma=0.7, r=3).validate()


def test_classify_endpoint_sharing_is_bad(grid):
    params = GoodnessParams.from_exponents(M, 1.0)
    res = classify_good(grid, Cube(8, 0), params, 8)
    assert res.status == "bad"
    assert res.hit_scale is not None


def test_classify_cutoff_below_r(grid):
    params = GoodnessParams.from_exponents(M, 1.0)
    with pytest.raises(CutoffBelowR):
        classify_good(grid, Cube(8, 10), params, params.r - 1)


def test_classify_good_flag_and_monotone():
    params = GoodnessParams.from_exponents(M, 1.0, ensure_positive=True)
    g = make_grid(3, (0, params.r + 8))
    cube = Cube(params.r + 8, 5)
    res = classify_good(g, cube, params, params.r)
    assert res.beyond_cutoff_unknown or res.status == "bad"
    # Raising the cutoff can only flip good -> bad (badness is a union).
    deeper = classify_good(g, cube, params, params.r + 5)
    if res.status == "bad":
        assert deeper.status == "bad"


def test_goodness_uses_only_coarse_bits():
    params = GoodnessParams.from_exponents(M, 1.0, ensure_positive=True)
    cutoff = params.r + 3
    rng = np.random.default_rng(20)
    for trial in range(100):
        coarse = tuple(int(b) for b in rng.integers(0, 2, size=cutoff))
        fine_a = tuple(int(b) for b in rng.integers(0, 2, size=5))
        fine_b = tuple(int(b) for b in rng.integers(0, 2, size=5))
        cube = Cube(cutoff, int(rng.integers(0, 100)))
        ra = classify_good(ShiftedGrid(0, cutoff + 5, coarse + fine_a), cube, params, cutoff)
        rb = classify_good(ShiftedGrid(0, cutoff + 5, coarse + fine_b), cube, params, cutoff)
        assert ra.status == rb.status


def test_estimate_pi_good():
    est = estimate_pi_good(M, 1.0, 400, seed=3, cutoff=16)
    assert len(est.estimates) == 2
    assert all(0.0 < e < 1.0 for e in est.estimates)
    assert est.spread_in_se <= 3.0
    est2 = estimate_pi_good(M, 1.0, 400, seed=3, cutoff=16)
    assert est.estimates == est2.estimates  # deterministic
    with pytest.raises(InvalidParams):
        estimate_pi_good(M, 1.0, 10, seed=3, cutoff=16)


def _flip_b(grid, n_leaves):
    def b_of(cube):
        s, ln = grid.cube_units(cube)
        v = np.zeros(n_leaves)
        if ln < 16:
            v[s:s + ln] = 1.0
            return v
        flip = s + (5 * ln) // 16
        v[s:flip] = 1.0
        v[flip:s + ln] = -1.0
        return v

    return b_of


def test_stopping_constant_b_never_stops(grid, lebesgue):
    ones = lambda cube: np.ones(256)
    forest = build_stopping(lebesgue, ones, Cube(0, 0), 0.5, 6, grid)
    assert forest.layers == [[Cube(0, 0)]]
    assert forest.max_packing_fraction() == 0.0


def test_stopping_accretivity_violated(grid, lebesgue):
    # A perfect +-1 split has zero average at the root.
    def bad_b(cube):
        v = np.ones(256)
        v[128:] = -1.0
        return v

    with pytest.raises(AccretivityViolated):
        build_stopping(lebesgue, bad_b, Cube(0, 0), 0.25, 6, grid)


def test_stopping_flip_fixture_hand_computed(grid, lebesgue):
    # b = +1 on [0, 5/16), -1 on [5/16, 1): root average -3/8, and the
    # maximal cube with |avg| < 1/4 is [1/4, 3/8): avg over it is
    # (1/16 - 1/16) / (1/8) = 0 on the half-split... computed by hand:
    # [1/4, 1/2): avg = (1/16 - 3/16)/(1/4) = -1/2 (survives);
    # [1/4, 3/8): avg = (1/16 - 1/16)/(1/8) = 0 < 1/4 (stops).
    forest = build_stopping(lebesgue, _flip_b(grid, 256), Cube(0, 0), 0.25, 8, grid)
    assert Cube(3, 2) in forest.layers[1]
    assert forest.stop_parent[Cube(3, 2)] == Cube(0, 0)
    tau = forest.max_packing_fraction()
    assert 0 < tau < 1


def test_packing_bound(grid, lebesgue):
    forest = build_stopping(lebesgue, _flip_b(grid, 256), Cube(0, 0), 0.25, 8, grid)
    tau = forest.max_packing_fraction()
    for R in (Cube(0, 0), Cube(1, 0), Cube(3, 2)):
        ratio = carleson_packing(forest, lebesgue, R)
        assert ratio <= 1.0 / (1.0 - tau) + 1.0 + 1e-12


def test_packing_synthetic_geometric_forest(grid, lebesgue):
    # Hand-built forest with tau = 1/2 per layer: each layer is the left
    # half of the previous cube; packing sum <= geometric series = 2 plus
    # the top layer.
    layers = [[Cube(0, 0)], [Cube(1, 0)], [Cube(2, 0)], [Cube(3, 0)]]
    forest = StoppingForest(
        grid=grid, root=Cube(0, 0), threshold=0.5, layers=layers,
        stop_parent={}, packing_fraction={c[0]: 0.5 for c in layers[:-1]},
        b_family=lambda cube: np.ones(256),
    )
    ratio = carleson_packing(forest, lebesgue, Cube(0, 0))
    assert ratio == pytest.approx(1 + 0.5 + 0.25 + 0.125)
    assert ratio <= sum(0.5**j for j in range(0, 10)) + 1.0


def test_martingale_reconstruction_and_energy(grid, lebesgue):
    ones = lambda cube: np.ones(256)
    forest = build_stopping(lebesgue, ones, Cube(0, 0), 0.5, 8, grid)
    rng = np.random.default_rng(9)
    f = rng.normal(size=256)
    mc = martingale_decompose(lebesgue, forest, f, depth=8)
    assert np.max(np.abs(mc.reconstruction() - f)) <= 1e-10
    for q in mc.deltas:
        if q != Cube(0, 0):
            assert abs(mc.integral(q)) <= 1e-12
    fsq = float(np.sum(f**2 * mc.leaf_masses))
    # b == 1 differences are orthogonal projections: energy equals ||f||^2.
    assert mc.energy() == pytest.approx(fsq, rel=1e-12)


def test_martingale_b_constant_gives_zero_differences(grid, lebesgue):
    ones = lambda cube: np.ones(256)
    forest = build_stopping(lebesgue, ones, Cube(0, 0), 0.5, 8, grid)
    mc = martingale_decompose(lebesgue, forest, np.ones(256), depth=8)
    # f = b = 1: all normalized averages coincide, every Delta_Q with
    # Q != Q0 vanishes.
    for q, v in mc.deltas.items():
        if q != Cube(0, 0):
            assert np.max(np.abs(v)) <= 1e-14
    assert np.max(np.abs(mc.deltas[Cube(0, 0)] - 1.0)) <= 1e-14


def test_martingale_flip_forest(grid, lebesgue):
    forest = build_stopping(lebesgue, _flip_b(grid, 256), Cube(0, 0), 0.25, 8, grid)
    rng = np.random.default_rng(10)
    f = rng.normal(size=256)
    mc = martingale_decompose(lebesgue, forest, f, depth=8)
    assert np.max(np.abs(mc.reconstruction() - f)) <= 1e-10
    for q in mc.deltas:
        if q != Cube(0, 0):
            assert abs(mc.integral(q)) <= 1e-12


def test_martingale_near_zero_average_detected(grid, lebesgue):
    # A b family that is accretive at the root but degenerates on a cube the
    # stopping rule ignores (constant threshold too small to trigger).
    def degenerate_b(cube):
        v = np.ones(256)
        v[64:128] = -1.0  # zero average on [1/4, 1/2)
        return v

    forest = build_stopping(lebesgue, degenerate_b, Cube(0, 0), 0.01, 8, grid)
    with pytest.raises(DivisionByNearZeroAverage):
        martingale_decompose(lebesgue, forest, np.ones(256), depth=8)


def test_martingale_on_cantor_measure(grid):
    mu = build_cantor(CantorParams(m=M, C=16.0, depth=8))
    ones = lambda cube: np.ones(256)
    forest = build_stopping(mu, ones, Cube(0, 0), 0.5, 8, grid)
    rng = np.random.default_rng(12)
    f = rng.normal(size=256)
    mc = martingale_decompose(mu, forest, f, depth=8)
    rec = mc.reconstruction()
    # Agreement holds mu-almost everywhere: only leaves with mass matter.
    sel = mc.leaf_masses > 0
    assert np.max(np.abs((rec - f)[sel])) <= 1e-10


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_whitney_cover_property(seed):
    g = make_grid(seed, (0, 10))
    rng = np.random.default_rng(seed)
    y = float(rng.uniform(0.2, 0.8))
    t = float(np.exp(rng.uniform(np.log(2.0**-10), 0.0)))
    count = 0
    for i in range(0, 11):
        ell = 2.0**-i
        if ell / 2 <= t < ell:
            cube = g.containing_cube(y, i)
            a, b = g.cube_interval(cube)
            if a <= y < b:
                count += 1
    assert count == 1
