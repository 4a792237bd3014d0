"""Counterexample function f = prod f_n built from equally spaced set families.

Each factor is e**(-a_n) on a union E_n of 2**k_exp equally spaced pieces and
1 elsewhere, so ln(1/f(t)) is the integer A(t) = sum a_n * 1_{E_n}(t).  All
set queries (membership, overlaps, piece counts) run in exact rational
arithmetic; pieces are never materialized, so k_n may be an astronomically
large power of two represented by its exponent alone.

Two parameter profiles:

* "paper": a_n = (n * 2**n)**n, k_n chosen so 2/k_n <= exp(-sum_{j<=n} a_j).
  All per-factor inequalities are exact; capped at N = 4 because the k_5
  exponent (~1.5e11 bits) exceeds any practical budget.
* "demo": a_n = n, mass budget |E_n| a_n = 8**-n, same spacing rule for k_n.
  The slow exponent growth keeps every breakpoint enumerable (k_4 = 2**16),
  which the direct Carleson integrals and exact moment sweeps need; the
  fast-decaying budget makes the truncated Carleson profile stabilize within
  a few percent by N = 2, so per-interval checks are uniform in N.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import (
    DegenerateInterval,
    ExponentOverflow,
    InvalidParams,
    OutOfDomain,
    QuadratureBudgetExceeded,
    WrongProfile,
)

__all__ = [
    "SpacedSetFamily",
    "LogProductFn",
    "build_logproduct",
    "eval_f",
    "overlap",
    "carleson_log_bound",
    "lp_divergence_witness",
    "demo_carleson_quadrature",
    "log_moment",
    "log_moments",
    "LOG2E_HI",
    "LOG2E_LO",
]

Rational = Union[Fraction, int]

# Certified rational bounds: LOG2E_LO < log2(e) < LOG2E_HI.
# log2(e) = 1.4426950408889634074...
LOG2E_HI = Fraction(14426950408889635, 10**16)
LOG2E_LO = Fraction(14426950408889633, 10**16)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


@dataclass(frozen=True)
class SpacedSetFamily:
    """k = 2**k_exp pieces of length total_measure/k, piece i at [i/k, i/k + len]."""

    n: int
    a_n: int
    total_measure: Fraction
    k_exp: int

    @property
    def piece_length(self) -> Fraction:
        return self.total_measure / (1 << self.k_exp)

    def contains(self, t: Rational) -> bool:
        """Membership by integer residue arithmetic; closed pieces."""
        t = Fraction(t)
        if not (0 <= t <= 1):
            raise OutOfDomain(f"t={t} outside [0,1]")
        p, q = t.numerator, t.denominator
        if p == q:  # t = 1 lies beyond the last piece unless |E| = 1
            return self.total_measure == 1
        # t*k - floor(t*k) <= total_measure, cleared of denominators.
        r = (p << self.k_exp) % q
        return r * self.total_measure.denominator <= q * self.total_measure.numerator

    def overlap(self, a: Rational, b: Rational) -> tuple[Fraction, int]:
        """Exact |E ∩ [a,b]| and the number of pieces met."""
        a = Fraction(a)
        b = Fraction(b)
        if not (0 <= a <= b <= 1):
            raise OutOfDomain(f"[{a}, {b}] not inside [0,1]")
        if a == b:
            return Fraction(0), 0
        da, db = a.denominator, b.denominator
        if (
            da & (da - 1) == 0
            and db & (db - 1) == 0
            and max(da.bit_length(), db.bit_length()) - 1 <= self.k_exp
        ):
            # Dyadic endpoints at least as coarse as the piece lattice: the
            # equally spaced pieces tile each dyadic cell exactly, giving
            # |E ∩ [a,b]| = |E| (b - a) without any huge-integer reduction.
            diff = b - a
            count = diff.numerator << (self.k_exp - (diff.denominator.bit_length() - 1))
            return self.total_measure * diff, count + (1 if b < 1 else 0)
        k = 1 << self.k_exp
        pl = self.piece_length
        # Piece i intersects [a,b] iff i/k <= b and i/k + pl >= a.
        i_min = max(0, _ceil((a - pl) * k))
        i_max = min(k - 1, _floor(b * k))
        if i_min > i_max:
            return Fraction(0), 0
        count = i_max - i_min + 1
        if count == 1:
            lo = Fraction(i_min, k)
            piece = min(b, lo + pl) - max(a, lo)
            return max(piece, Fraction(0)), (1 if piece > 0 else 0)
        # Interior pieces lie fully inside [a,b] because pl <= 1/k.
        total = (count - 2) * pl
        first = Fraction(i_min, k)
        last = Fraction(i_max, k)
        total += min(b, first + pl) - max(a, first)
        total += min(b, last + pl) - max(a, last)
        return total, count


@dataclass
class LogProductFn:
    profile: str
    N: int
    factors: tuple[SpacedSetFamily, ...]
    _breakpoints: Optional[list[Fraction]] = None

    def exponent(self, t: Rational) -> int:
        """A(t) = sum of a_n over the families containing t; ln(1/f(t)) exactly."""
        t = Fraction(t)
        if not (0 <= t <= 1):
            raise OutOfDomain(f"t={t} outside [0,1]")
        return sum(F.a_n for F in self.factors if F.contains(t))

    def exponent_budget(self) -> Fraction:
        """sum |E_n| a_n: exactly 1 - 2**-N (paper) or (1 - 8**-N)/7 (demo)."""
        return sum((F.total_measure * F.a_n for F in self.factors), Fraction(0))

    def breakpoints(self) -> list[Fraction]:
        """Sorted piece endpoints of every family plus 0 and 1 (demo profile)."""
        if self.profile != "demo":
            raise WrongProfile("breakpoint enumeration needs the demo profile")
        if self._breakpoints is None:
            pts = {Fraction(0), Fraction(1)}
            for F in self.factors:
                k = 1 << F.k_exp
                pl = F.piece_length
                for i in range(k):
                    lo = Fraction(i, k)
                    pts.add(lo)
                    pts.add(lo + pl)
            self._breakpoints = sorted(p for p in pts if 0 <= p <= 1)
        return self._breakpoints


def eval_f(f: LogProductFn, t: Rational) -> tuple[int, float]:
    """Exact integer exponent A(t) and the double e**-A (0.0 on underflow)."""
    a = f.exponent(t)
    try:
        val = math.exp(-a)
    except OverflowError:
        val = 0.0
    return a, val


def overlap(family: SpacedSetFamily, a: Rational, b: Rational) -> tuple[Fraction, int]:
    return family.overlap(a, b)


def build_logproduct(profile: str, N: int) -> LogProductFn:
    if N < 1:
        raise InvalidParams(f"N must be >= 1, got {N}")
    factors = []
    if profile == "paper":
        if N > 4:
            raise ExponentOverflow(
                "paper profile capped at N=4; the k_5 exponent needs ~1.5e11 bits"
            )
        a_cum = 0
        for n in range(1, N + 1):
            a_n = (n * 2**n) ** n
            a_cum += a_n
            # 2/k_n <= exp(-sum a_j) guaranteed through the certified log2(e) bound.
            k_exp = _ceil(1 + LOG2E_HI * a_cum)
            factors.append(
                SpacedSetFamily(n=n, a_n=a_n, total_measure=Fraction(1, 2**n * a_n), k_exp=k_exp)
            )
    elif profile == "demo":
        if N > 4:
            raise ExponentOverflow(
                "demo profile capped at N=4; beyond that the pieces are not enumerable"
            )
        a_cum = 0
        for n in range(1, N + 1):
            a_n = n
            a_cum += a_n
            k_exp = _ceil(1 + LOG2E_HI * a_cum)
            factors.append(
                SpacedSetFamily(n=n, a_n=a_n, total_measure=Fraction(1, 8**n * a_n), k_exp=k_exp)
            )
    else:
        raise InvalidParams(f"unknown profile {profile!r}")
    return LogProductFn(profile=profile, N=N, factors=tuple(factors))


@dataclass(frozen=True)
class CarlesonLogBound:
    cutoff: int
    bound: Fraction


def carleson_log_bound(f: LogProductFn, a: Rational, b: Rational) -> CarlesonLogBound:
    """Exact upper bound U(I) = sum_{n > N_I} a_n |E_n ∩ I| of the Carleson integral.

    N_I is the largest N with a certified len(I) <= exp(-sum_{n<=N} a_n); the
    certification compares against 2**-ceil(A * LOG2E_HI), which is at most
    one binary digit conservative and aligned with the k_n spacing rule, so
    the resulting bound always dominates the true integral.
    """
    a = Fraction(a)
    b = Fraction(b)
    ell = b - a
    if ell <= 0:
        raise DegenerateInterval(f"interval [{a}, {b}] has no length")
    cutoff = 0
    a_cum = 0
    for F in f.factors:
        a_cum += F.a_n
        q = _ceil(Fraction(a_cum) * LOG2E_HI)
        if ell * (1 << q) <= 1:  # ell <= 2**-q <= exp(-a_cum)
            cutoff = F.n
        else:
            break
    bound = Fraction(0)
    for F in f.factors:
        if F.n > cutoff:
            piece, _ = F.overlap(a, b)
            bound += F.a_n * piece
    return CarlesonLogBound(cutoff=cutoff, bound=bound)


def _exact_nth_root(value: int, n: int) -> int:
    """Integer r with r**n == value; raises if value is not a perfect power."""
    r = round(value ** (1.0 / n))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**n == value:
            return cand
    raise InvalidParams(f"{value} is not a perfect {n}-th power")


def lp_divergence_witness(f: LogProductFn, n: int) -> Fraction:
    """|E_n| * a_n**(1 + 1/n), exact; the witness of the L^p blow-up, >= n."""
    if f.profile != "paper":
        raise WrongProfile("divergence witness is defined for the paper profile")
    if not (1 <= n <= f.N):
        raise OutOfDomain(f"n={n} outside 1..{f.N}")
    F = f.factors[n - 1]
    root = _exact_nth_root(F.a_n, n)
    return F.total_measure * F.a_n * root


def _segments(f: LogProductFn, a: Fraction, b: Fraction, budget: int):
    """(lo, hi, A) pieces of the exponent A(t) on [a,b], exact endpoints."""
    bp = f.breakpoints()
    i = bisect.bisect_right(bp, a)
    j = bisect.bisect_left(bp, b)
    pts = [a] + bp[i:j] + [b]
    if len(pts) - 1 > budget:
        raise QuadratureBudgetExceeded(
            f"{len(pts) - 1} segments exceed the resolution budget {budget}"
        )
    out = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = (lo + hi) / 2
        out.append((lo, hi, f.exponent(mid)))
    return out


def demo_carleson_quadrature(f: LogProductFn, a: Rational, b: Rational, resolution: int = 300_000) -> float:
    """Direct ∫_I ln+ (len(I)/f) dt by exact piecewise-constant integration."""
    if f.profile != "demo":
        raise WrongProfile("direct quadrature needs the demo profile")
    a = Fraction(a)
    b = Fraction(b)
    ell = b - a
    if ell <= 0:
        raise DegenerateInterval(f"interval [{a}, {b}] has no length")
    log_ell = math.log(float(ell))
    total = 0.0
    for lo, hi, A in _segments(f, a, b, resolution):
        val = max(0.0, A + log_ell)
        total += float(hi - lo) * val
    return total


def log_moments(f: LogProductFn, ps: tuple[int, ...]) -> dict[int, Fraction]:
    """∫_0^1 (ln 1/f)^p dt = ∫ A(t)^p dt for each p, exact, one segment sweep."""
    if f.profile != "demo":
        raise WrongProfile("exact moments need the demo profile")
    totals = {p: Fraction(0) for p in ps}
    for lo, hi, A in _segments(f, Fraction(0), Fraction(1), 10**7):
        w = hi - lo
        for p in ps:
            totals[p] += w * A**p
    return totals


def log_moment(f: LogProductFn, p: int) -> Fraction:
    """∫_0^1 (ln 1/f)^p dt, exact (demo profile)."""
    return log_moments(f, (p,))[p]
