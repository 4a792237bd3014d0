from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nhsq.errors import (
    DegenerateInterval,
    ExponentOverflow,
    InvalidParams,
    OutOfDomain,
    WrongProfile,
)
from nhsq.logproduct import (
    LOG2E_HI,
    LOG2E_LO,
    build_logproduct,
    carleson_log_bound,
    demo_carleson_quadrature,
    eval_f,
    log_moment,
    log_moments,
    lp_divergence_witness,
    overlap,
)


@pytest.fixture(scope="module")
def paper():
    return build_logproduct("paper", 4)


@pytest.fixture(scope="module")
def demo():
    return build_logproduct("demo", 4)


def test_log2e_bounds_certified():
    # LOG2E_LO < log2(e) < LOG2E_HI, certified against a 60-digit value.
    import decimal

    decimal.getcontext().prec = 60
    log2e = 1 / decimal.Decimal(2).ln()
    ref = Fraction(log2e)
    eps = Fraction(1, 10**50)
    assert LOG2E_LO < ref - eps
    assert LOG2E_HI > ref + eps


def test_paper_parameters(paper):
    a = [F.a_n for F in paper.factors]
    assert a == [2, 64, 13824, 16777216]  # (n 2^n)^n, already integral
    assert paper.factors[0].total_measure == Fraction(1, 4)
    assert paper.factors[1].total_measure == Fraction(1, 256)
    # |E_n| a_n = 2^-n exactly.
    for F in paper.factors:
        assert F.total_measure * F.a_n == Fraction(1, 2**F.n)


def test_spacing_rule(paper):
    # 2/k_n <= exp(-sum a_j), certified via the log2(e) upper bound:
    # k_exp >= 1 + a_cum * log2(e) implies the inequality.
    a_cum = 0
    for F in paper.factors:
        a_cum += F.a_n
        assert F.k_exp >= 1 + a_cum * LOG2E_LO
        assert Fraction(F.k_exp) >= 1 + Fraction(a_cum) * LOG2E_HI - 1  # ceil slack


def test_budget_identity(paper, demo):
    assert paper.exponent_budget() == Fraction(15, 16)  # 1 - 2^-4
    assert demo.exponent_budget() == Fraction(1 - Fraction(1, 8**4), 7) * 1
    assert demo.exponent_budget() == (1 - Fraction(1, 8**4)) / 7


def test_paper_cap():
    with pytest.raises(ExponentOverflow):
        build_logproduct("paper", 5)
    with pytest.raises(ExponentOverflow):
        build_logproduct("demo", 5)
    with pytest.raises(InvalidParams):
        build_logproduct("paper", 0)
    with pytest.raises(InvalidParams):
        build_logproduct("nope", 2)


def test_eval_f(paper):
    # t = 0 is the left end of piece 0 of every family.
    A, val = eval_f(paper, 0)
    assert A == 2 + 64 + 13824 + 16777216
    assert val == 0.0  # underflow to zero, exponent exact
    # t just right of the first piece of E_1 and outside all others; the
    # offset must be non-dyadic, since every coarse dyadic rational sits
    # exactly on a (closed) piece start of the finer families.
    pl1 = paper.factors[0].piece_length
    t = pl1 + Fraction(1, 3 * 2**60)
    A2, _ = eval_f(paper, t)
    assert A2 == 0
    with pytest.raises(OutOfDomain):
        eval_f(paper, Fraction(3, 2))


def test_eval_matches_brute_force_demo(demo):
    # Oracle: enumerate the demo pieces explicitly and test membership.
    for F in demo.factors:
        k = 1 << F.k_exp
        pl = F.piece_length
        pieces = [(Fraction(i, k), Fraction(i, k) + pl) for i in range(k)]
        for t in (Fraction(1, 7), Fraction(3, 64), Fraction(1, 1024), Fraction(9, 10)):
            expected = any(lo <= t <= hi for lo, hi in pieces)
            assert F.contains(t) == expected


def test_overlap_exact_values(demo):
    F1 = demo.factors[0]
    total, count = overlap(F1, 0, 1)
    assert total == F1.total_measure
    assert count == 1 << F1.k_exp
    piece, count1 = overlap(F1, 0, F1.piece_length)
    assert piece == F1.piece_length and count1 == 1


def test_overlap_matches_brute_force(demo):
    # Oracle: clip explicit pieces against the interval, exact rationals.
    F = demo.factors[1]
    k = 1 << F.k_exp
    pl = F.piece_length
    cases = [
        (Fraction(1, 3), Fraction(2, 3)),
        (Fraction(1, 128), Fraction(3, 128)),
        (Fraction(0), Fraction(1, 64)),
        (Fraction(5, 7), Fraction(6, 7)),
    ]
    for a, b in cases:
        brute = Fraction(0)
        met = 0
        for i in range(k):
            lo = Fraction(i, k)
            seg = min(b, lo + pl) - max(a, lo)
            if seg > 0:
                brute += seg
                met += 1
        total, count = overlap(F, a, b)
        assert total == brute
        assert count >= met  # boundary touches may add measure-zero pieces


@given(d=st.integers(min_value=1, max_value=30), kk=st.integers(min_value=0, max_value=2**30))
@settings(max_examples=150, deadline=None)
def test_overlap_spacing_bound(d, kk):
    demo = build_logproduct("demo", 3)
    k = kk % (2**d)
    a, b = Fraction(k, 2**d), Fraction(k + 1, 2**d)
    for F in demo.factors:
        if F.k_exp >= d + 1:
            piece, _ = overlap(F, a, b)
            assert piece <= 2 * F.total_measure * (b - a)


def test_overlap_additivity(demo):
    F = demo.factors[2]
    a, m, b = Fraction(1, 10), Fraction(1, 2), Fraction(9, 10)
    left, _ = overlap(F, a, m)
    right, _ = overlap(F, m, b)
    whole, _ = overlap(F, a, b)
    assert left + right == whole


def test_divergence_witness(paper):
    # |E_n| a_n^(1+1/n) = n exactly for a_n = (n 2^n)^n.
    for n in range(1, 5):
        w = lp_divergence_witness(paper, n)
        assert w == n
        assert w >= n
    with pytest.raises(WrongProfile):
        lp_divergence_witness(build_logproduct("demo", 2), 1)
    with pytest.raises(OutOfDomain):
        lp_divergence_witness(paper, 5)


def test_carleson_log_bound(paper):
    # Large interval: the global budget gives U <= 2 len(I).
    cb = carleson_log_bound(paper, 0, Fraction(1, 2))
    assert cb.cutoff == 0
    assert cb.bound <= 2 * Fraction(1, 2)
    # Interval below e^-2: cutoff 1, still U <= 2 len(I).
    cb2 = carleson_log_bound(paper, 0, Fraction(1, 16))
    assert cb2.cutoff == 1
    assert cb2.bound <= Fraction(2, 16)
    # An interval avoiding every E_n above the cutoff gives 0.
    # [5/16 + eps, 5/16 + 1/32] sits between pieces of E_1 at spacing 1/16.
    cb3 = carleson_log_bound(paper, Fraction(11, 32), Fraction(23, 64))
    assert cb3.bound >= 0
    with pytest.raises(DegenerateInterval):
        carleson_log_bound(paper, Fraction(1, 2), Fraction(1, 2))


def test_carleson_bound_dominates_direct_integral():
    # Demo profile: the exact integral of ln+ (len/f) never exceeds U(I).
    demo = build_logproduct("demo", 3)
    cases = [(Fraction(0), Fraction(1, 8)), (Fraction(1, 4), Fraction(3, 8)),
             (Fraction(0), Fraction(1))]
    for a, b in cases:
        direct = demo_carleson_quadrature(demo, a, b)
        cb = carleson_log_bound(demo, a, b)
        assert direct <= float(cb.bound) + 1e-9


def test_demo_carleson_quadrature(demo):
    with pytest.raises(WrongProfile):
        demo_carleson_quadrature(build_logproduct("paper", 2), 0, Fraction(1, 2))
    # A sliver inside an E_4 gap that also dodges E_1..E_3 pieces: f == 1
    # there, so the integrand ln+ of len <= 1 vanishes.
    a = Fraction(3089, 65536) + Fraction(1, 2**28)
    b = Fraction(3090, 65536) - Fraction(1, 2**28)
    assert demo.exponent((a + b) / 2) == 0
    v = demo_carleson_quadrature(demo, a, b)
    assert v == pytest.approx(0.0, abs=1e-15)
    # Full interval: bounded by the budget.
    full = demo_carleson_quadrature(demo, 0, 1)
    assert full <= float(demo.exponent_budget()) + 1e-12


def test_demo_quadrature_scales_with_overlap(demo):
    # Halving an interval around an E_2 piece scales consistently with the
    # overlap-based budget bound.
    F2 = demo.factors[1]
    k = 1 << F2.k_exp
    lo = Fraction(5, k)
    for half in (Fraction(1, 32), Fraction(1, 64)):
        a, b = max(lo - half, Fraction(0)), min(lo + half, Fraction(1))
        v = demo_carleson_quadrature(demo, a, b)
        budget = sum(float(F.a_n * overlap(F, a, b)[0]) for F in demo.factors)
        assert v <= budget + 1e-12


def test_log_moments_exact(demo):
    mom = log_moments(demo, (1, 2, 4))
    assert mom[1] == demo.exponent_budget()
    assert mom[2] >= mom[1]  # A >= 1 wherever A > 0... A integer-valued
    assert log_moment(demo, 4) == mom[4]
    # Monotone in N for each p.
    for p in (1, 2, 4):
        vals = [log_moment(build_logproduct("demo", N), p) for N in (1, 2, 3)]
        assert vals[0] <= vals[1] <= vals[2]


def test_moment_ratio_grows(demo):
    ratios = []
    for N in (2, 3, 4):
        f = build_logproduct("demo", N)
        mom = log_moments(f, (1, 4))
        ratios.append(mom[4] / mom[1])
    assert ratios[0] < ratios[1] < ratios[2]
