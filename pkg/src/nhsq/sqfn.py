"""Conical and vertical square functions over the Cantor measure, their
L2 norms by multiscale quadrature, and the testing / weak-(1,1) functionals.

The L2 norm of S_alpha(1) is computed generation by generation:

    ||S_alpha 1||^2 = sum_n g(n, alpha),
    g(n, alpha) = sum_{I in gen n} contribution(I).

Because every generation-n node carries the same normalized geometry, the
contribution of I is mu(I) times a quantity evaluated once on the
generation-n template, and sum mu(I) = 1 collapses the 4**n node sum to a
single template quadrature.  The collapse is validated against direct node
enumeration at shallow depth (OracleMismatch if they disagree).

For apertures alpha <= 2 the ball B(y, alpha t) never escapes the node I for
(y, t) in its strip/band region (the strip sits 2 L_I from the node ends
while alpha t <= 2 L_I), so the template quadrature with balls clipped to
[0,1] is exact; wider apertures would need cross-node terms and are not
supported by the collapsed path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (
    EmptyCubeList,
    InvalidParams,
    OracleMismatch,
    QuadratureBudgetExceeded,
)
from .kernels import (
    CantorKernel,
    LogProductKernel,
    bump,
    node_atoms,
    phi_v_antiderivative,
)
from .logproduct import _segments
from .measures import CantorMeasure

__all__ = [
    "ConeSpec",
    "QuadratureConfig",
    "NormSeries",
    "LeafFunction",
    "CantorSquareContext",
    "conical_norm_series",
    "vertical_norm_series",
    "direct_norm_series",
    "validate_collapse",
    "conical_value",
    "vertical_value",
    "l2_operator_ratio",
    "testing_functional",
    "TestingResult",
    "CubeTestingValue",
    "ci_profile",
    "weak11_functional",
    "Weak11Result",
    "snorm_by_x_integration",
    "snorm_by_tilde_route",
]

LN2 = math.log(2.0)


def _band_tail_weight(d, t_lo: float, t_hi: float, alpha: float, m: float):
    """integral of s^(-m-1) over {s in [t_lo, t_hi] : alpha s > d}, elementwise in d.

    This is the exact t-integral of the indicator 1_{|y-u| < alpha s} against
    ds/s^(m+1); using it instead of a t grid removes the staircase error that
    the Cantor ball-mass function produces under midpoint rules.
    """
    d = np.asarray(d, dtype=float)
    lo = np.maximum(t_lo, d / alpha)
    return np.where(lo < t_hi, (lo ** -m - t_hi ** -m) / m, 0.0)


@dataclass(frozen=True)
class ConeSpec:
    """Aperture alpha >= 1 and the exponent m of the dt/t^(m+1) weight."""

    alpha: float
    m: float

    def validate(self) -> None:
        if self.alpha < 1.0:
            raise InvalidParams(f"aperture must be >= 1, got {self.alpha}")


@dataclass(frozen=True)
class QuadratureConfig:
    t_steps_per_band: int = 32
    y_resolution_depth: int = 6
    rel_tol: float = 1e-3
    trunc_generation: int = 20

    def validate(self) -> None:
        if self.t_steps_per_band < 1 or self.y_resolution_depth < 1 or self.trunc_generation < 0:
            raise InvalidParams("quadrature parameters must be positive")
        if not (0.0 < self.rel_tol <= 0.1):
            raise InvalidParams(f"rel_tol must be in (0, 0.1], got {self.rel_tol}")


@dataclass
class NormSeries:
    """Per-generation contributions g(n) for n = 0..N and their partial sums."""

    alpha: Optional[float]
    terms: np.ndarray
    err_est: np.ndarray

    @property
    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.terms)

    @property
    def total(self) -> float:
        return float(self.terms.sum())

    def rows(self) -> list[tuple]:
        """(n, alpha, g_n, partial_sum, err_est) rows for CSV emission."""
        ps = self.partial_sums
        a = "" if self.alpha is None else self.alpha
        return [
            (n, a, float(self.terms[n]), float(ps[n]), float(self.err_est[n]))
            for n in range(len(self.terms))
        ]


@dataclass
class LeafFunction:
    """Piecewise-constant function on the depth-`depth` leaves of a measure."""

    measure: CantorMeasure
    depth: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (4**self.depth,):
            raise InvalidParams(f"need 4**{self.depth} leaf values")

    def leaf_index(self, x: float) -> Optional[int]:
        """Base-4 path of the leaf containing x, None if x is in a gap."""
        off, length = 0.0, 1.0
        idx = 0
        for k in range(1, self.depth + 1):
            geo = self.measure.geometry[k]
            hit = None
            for j in range(4):
                coff = off + geo.child_offsets[j] * length
                clen = geo.child_lengths[j] * length
                if coff <= x <= coff + clen:
                    hit = (j, coff, clen)
                    break
            if hit is None:
                return None
            j, off, length = hit[0], hit[1], hit[2]
            idx = idx * 4 + j
        return idx

    def __call__(self, x: float) -> float:
        idx = self.leaf_index(x)
        return 0.0 if idx is None else float(self.values[idx])

    def l1_norm(self) -> float:
        _, _, masses = self.measure.leaf_table(self.depth)
        return float(np.sum(np.abs(self.values) * masses))

    def l2_norm_sq(self) -> float:
        _, _, masses = self.measure.leaf_table(self.depth)
        return float(np.sum(self.values**2 * masses))

    @staticmethod
    def constant(measure: CantorMeasure, depth: int, value: float = 1.0) -> "LeafFunction":
        return LeafFunction(measure, depth, np.full(4**depth, value))

    @staticmethod
    def spike(measure: CantorMeasure, depth: int, leaf: int) -> "LeafFunction":
        """Indicator of one leaf normalized to unit L1(mu) mass."""
        _, _, masses = measure.leaf_table(depth)
        vals = np.zeros(4**depth)
        vals[leaf] = 1.0 / masses[leaf]
        return LeafFunction(measure, depth, vals)


# -- template machinery -------------------------------------------------------------


class CantorSquareContext:
    """Caches per-generation template quantities for one (measure, quad) pair.

    beta(n): the normalized bump integral of generation-n nodes, i.e.
    theta_t 1 on an active strip.  band_weight(n, alpha): the normalized
    strip x band integral of mu(B(y, alpha t)) / t^m against dmu dt/t.
    """

    def __init__(self, measure: CantorMeasure, quad: QuadratureConfig):
        quad.validate()
        self.measure = measure
        self.quad = quad
        self._beta: dict[int, float] = {}
        self._weight: dict[tuple[int, float, int], float] = {}
        self._tpl_cache: dict[int, CantorMeasure] = {}

    def _template(self, n: int) -> CantorMeasure:
        if n not in self._tpl_cache:
            depth = min(self.quad.y_resolution_depth + 2, 9)
            self._tpl_cache[n] = self.measure.template(n, depth=depth)
            if len(self._tpl_cache) > 4:
                # Keep the working set small; templates are cheap to rebuild.
                oldest = next(iter(self._tpl_cache))
                if oldest != n:
                    del self._tpl_cache[oldest]
        return self._tpl_cache[n]

    def beta(self, n: int) -> float:
        """integral of phi_I dmu / mu(I) for generation-n nodes; phi_I pulled
        back to the template is sin^2(pi u)."""
        if n not in self._beta:
            tpl = self._template(n)
            d = min(self.quad.y_resolution_depth + 1, tpl.depth)
            starts, lens, masses = tpl.leaf_table(d)
            mids = starts + lens / 2.0
            self._beta[n] = float(np.sum(masses * np.sin(np.pi * mids) ** 2))
        return self._beta[n]

    def strip_atoms(self, n: int, extra: Optional[int] = None):
        """(midpoints, weights) of the template measure restricted to the
        two middle children."""
        tpl = self._template(n)
        geo = tpl.geometry[1]
        if extra is None:
            extra = min(max(self.quad.y_resolution_depth - 3, 1), tpl.depth - 1)
        mids, weights = [], []
        for j in (1, 2):
            m_, _, w_ = node_atoms(
                tpl, geo.child_offsets[j], geo.child_lengths[j], geo.child_masses[j], 1, extra
            )
            mids.append(m_)
            weights.append(w_)
        return np.concatenate(mids), np.concatenate(weights)

    def band_weight(self, n: int, alpha: float, y_depth: Optional[int] = None) -> float:
        """Normalized integral over strip x [L/2, L] of nu(B(u, alpha s))/s^m ds/s.

        Exact in t via the band tail weight; spatial integrals by measure
        atoms at the configured resolution (midpoint per atom).
        """
        y_depth = self.quad.y_resolution_depth if y_depth is None else y_depth
        key = (n, alpha, y_depth)
        if key not in self._weight:
            tpl = self._template(n)
            geo = tpl.geometry[1]
            Lhat = geo.L
            u_mids, u_w = self.strip_atoms(n, extra=min(max(y_depth - 3, 1), tpl.depth - 1))
            starts, lens, y_w = tpl.leaf_table(min(y_depth, tpl.depth))
            y_mids = starts + lens / 2.0
            m = self.measure.m
            tails = _band_tail_weight(
                np.abs(u_mids[:, None] - y_mids[None, :]), Lhat / 2.0, Lhat, alpha, m
            )
            self._weight[key] = float(u_w @ tails @ y_w)
        return self._weight[key]

    def g_term(self, n: int, alpha: float) -> tuple[float, float]:
        """(g(n, alpha), error estimate) for the conical norm series."""
        b2 = self.beta(n) ** 2
        w = self.band_weight(n, alpha)
        w_coarse = self.band_weight(n, alpha, y_depth=self.quad.y_resolution_depth - 1)
        return b2 * w, b2 * abs(w - w_coarse)

    def strip_fraction(self, n: int) -> float:
        """Mass fraction of the middle children of a generation-n node."""
        from .measures import _split_geometry

        idx = self.measure.params.start_gen + n + 1
        return _split_geometry(idx, self.measure.m, self.measure.params.C).strip_mass

    def g_vertical(self, n: int) -> float:
        """g_V(n) = beta(n)^2 * strip mass * ln 2 (the t integrand is constant)."""
        return self.beta(n) ** 2 * self.strip_fraction(n) * LN2


def conical_norm_series(
    measure: CantorMeasure, cone: ConeSpec, N: int, quad: QuadratureConfig,
    context: Optional[CantorSquareContext] = None,
) -> NormSeries:
    """||S_alpha(1)||^2 per-generation series via the template collapse."""
    cone.validate()
    ctx = context if context is not None else CantorSquareContext(measure, quad)
    terms = np.zeros(N + 1)
    errs = np.zeros(N + 1)
    for n in range(N + 1):
        terms[n], errs[n] = ctx.g_term(n, cone.alpha)
    series = NormSeries(alpha=cone.alpha, terms=terms, err_est=errs)
    if float(errs.sum()) > quad.rel_tol * max(series.total, 1e-300):
        raise QuadratureBudgetExceeded(
            f"series error estimate {errs.sum():.3e} exceeds rel_tol {quad.rel_tol} "
            f"of total {series.total:.3e}; raise y_resolution_depth"
        )
    return series


def vertical_norm_series(
    measure: CantorMeasure, N: int, quad: QuadratureConfig,
    context: Optional[CantorSquareContext] = None,
) -> NormSeries:
    """||V(1)||^2 per-generation series; exact in t (constant band integrand)."""
    ctx = context if context is not None else CantorSquareContext(measure, quad)
    terms = np.array([ctx.g_vertical(n) for n in range(N + 1)])
    return NormSeries(alpha=None, terms=terms, err_est=np.zeros(N + 1))


def direct_norm_series(
    measure: CantorMeasure, cone: ConeSpec, N: int, quad: QuadratureConfig
) -> NormSeries:
    """Brute-force oracle: enumerate all 4**n nodes per generation.

    Uses absolute coordinates and global ball masses; no template collapse.
    Intended for shallow N (cost 4**N nodes at generation N).
    """
    cone.validate()
    if N > 6:
        raise InvalidParams("direct enumeration is intended for N <= 6")
    if measure.depth < N + 3:
        raise InvalidParams("measure too shallow for the requested oracle depth")
    m = measure.m
    y_extra = min(quad.y_resolution_depth, measure.depth - N, 5)
    terms = np.zeros(N + 1)
    for n in range(N + 1):
        starts, lens, masses = measure.leaf_table(n)
        geo = measure.geometry[n + 1]
        for off, length, mass in zip(starts, lens, masses):
            L_abs = geo.L * length
            # theta_t 1 on the strip: bump integral over this node, directly.
            a_m, _, a_w = node_atoms(measure, off, length, mass, n, y_extra + 1)
            center = off + length / 2.0
            theta = float(np.sum(a_w * bump((a_m - center) / length))) / length**m
            s_mids, s_w = [], []
            for j in (1, 2):
                mj, _, wj = node_atoms(
                    measure,
                    off + geo.child_offsets[j] * length,
                    geo.child_lengths[j] * length,
                    mass * geo.child_masses[j],
                    n + 1,
                    max(y_extra - 2, 1),
                )
                s_mids.append(mj)
                s_w.append(wj)
            s_mids = np.concatenate(s_mids)
            s_w = np.concatenate(s_w)
            # Balls stay inside the node for alpha <= 2, so node atoms suffice.
            tails = _band_tail_weight(
                np.abs(s_mids[:, None] - a_m[None, :]), L_abs / 2.0, L_abs, cone.alpha, m
            )
            terms[n] += theta**2 * float(s_w @ tails @ a_w)
    return NormSeries(alpha=cone.alpha, terms=terms, err_est=np.zeros(N + 1))


def validate_collapse(
    measure: CantorMeasure, cone: ConeSpec, N: int, quad: QuadratureConfig, tol: float = 0.01
) -> float:
    """Max relative disagreement between collapsed and enumerated g(n, alpha)."""
    collapsed = conical_norm_series(measure, cone, N, quad)
    direct = direct_norm_series(measure, cone, N, quad)
    rel = np.abs(collapsed.terms - direct.terms) / np.maximum(direct.terms, 1e-300)
    worst = float(rel.max())
    if worst > tol:
        raise OracleMismatch(
            f"collapsed vs enumerated terms disagree by {worst:.2%} (tol {tol:.0%}) "
            f"at alpha={cone.alpha}"
        )
    return worst


# -- pointwise values ------------------------------------------------------------


def _chain(measure: CantorMeasure, x: float, max_gen: int):
    """Nodes of x's containment chain: (gen, offset, length, mass, child_index)."""
    out = []
    off, length, mass = 0.0, 1.0, 1.0
    idx = 0
    out.append((0, off, length, mass, idx))
    for g in range(1, max_gen + 1):
        if g > measure.depth:
            break
        geo = measure.geometry[g]
        hit = None
        for j in range(4):
            coff = off + geo.child_offsets[j] * length
            clen = geo.child_lengths[j] * length
            if coff <= x <= coff + clen:
                hit = (j, coff, clen)
                break
        if hit is None:
            break
        j, off, length = hit
        mass *= geo.child_masses[j]
        idx = idx * 4 + j
        out.append((g, off, length, mass, idx))
    return out


def _node_coefficient(measure, f, off, length, mass, gen, depth) -> float:
    """c_J(f) = integral of phi_J f dmu / len(J)^m by node-local quadrature."""
    mids, _, weights = node_atoms(measure, off, length, mass, gen, depth)
    center = off + length / 2.0
    phis = bump((mids - center) / length)
    if f is None:
        fv = 1.0
    else:
        fv = np.array([f(v) for v in mids])
    return float(np.sum(weights * phis * fv)) / length**measure.m


class _CoeffCache:
    """Per-node c_J(f) values, memoized; prunes zero-support nodes exactly
    when f is a leaf vector (the bump is supported inside the node)."""

    def __init__(self, measure: CantorMeasure, f, atom_depth: int):
        self.measure = measure
        self.f = f
        self.atom_depth = atom_depth
        self.cache: dict[tuple[int, int], float] = {}
        self.strip_cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
        self.nonzero = (
            np.flatnonzero(f.values) if isinstance(f, LeafFunction) else None
        )

    def strip_atoms(self, gen: int, node_idx: int, off: float, length: float, mass: float):
        """Atoms of the measure on the node's two middle children."""
        key = (gen, node_idx)
        if key not in self.strip_cache:
            geo = self.measure.geometry[gen + 1]
            extra = min(3, max(self.measure.depth - gen - 1, 0))
            mids, weights = [], []
            for j in (1, 2):
                mj, _, wj = node_atoms(
                    self.measure,
                    off + geo.child_offsets[j] * length,
                    geo.child_lengths[j] * length,
                    mass * geo.child_masses[j],
                    gen + 1,
                    extra,
                )
                mids.append(mj)
                weights.append(wj)
            self.strip_cache[key] = (np.concatenate(mids), np.concatenate(weights))
        return self.strip_cache[key]

    def value(self, gen: int, node_idx: int, off: float, length: float, mass: float) -> float:
        key = (gen, node_idx)
        if key in self.cache:
            return self.cache[key]
        f = self.f
        c = None
        if isinstance(f, LeafFunction):
            if gen <= f.depth:
                span = 4 ** (f.depth - gen)
                lo = node_idx * span
                i = int(np.searchsorted(self.nonzero, lo))
                if i >= len(self.nonzero) or self.nonzero[i] >= lo + span:
                    c = 0.0
            else:
                # Node below leaf resolution: f is constant there.
                leaf = node_idx // 4 ** (gen - f.depth)
                fl = float(f.values[leaf])
                if fl == 0.0:
                    c = 0.0
                else:
                    c = fl * _node_coefficient(
                        self.measure, None, off, length, mass, gen, self.atom_depth
                    )
        if c is None:
            c = _node_coefficient(self.measure, f, off, length, mass, gen, self.atom_depth)
        self.cache[key] = c
        return c


def _cone_weight(measure, strip_mids, strip_w, t_lo, t_hi, x, alpha, m) -> float:
    """integral over the band of mu(strip ∩ B(x, alpha t)) dt / t^(m+1).

    Exact in t: each strip atom y contributes the band tail weight at
    distance |x - y|.
    """
    tails = _band_tail_weight(np.abs(x - strip_mids), t_lo, t_hi, alpha, m)
    return float(np.sum(strip_w * tails))


def conical_value(kernel, measure, f, x: float, cone: ConeSpec, quad: QuadratureConfig,
                  coeffs: Optional[_CoeffCache] = None) -> float:
    """S_alpha f(x) over the kernel's active bands up to the truncation generation.

    For apertures <= 2 only nodes containing x contribute (strips of other
    nodes are at distance >= 2 L from x), so the chain walk is exhaustive.
    """
    cone.validate()
    if not isinstance(kernel, CantorKernel):
        raise InvalidParams("conical_value is defined for the Cantor kernel")
    total = 0.0
    depth = min(quad.y_resolution_depth, 6)
    if coeffs is None:
        coeffs = _CoeffCache(measure, f, depth)
    for g, off, length, mass, idx in _chain(measure, x, quad.trunc_generation):
        if g + 1 > measure.depth:
            break
        c = coeffs.value(g, idx, off, length, mass)
        if c == 0.0:
            continue
        geo = measure.geometry[g + 1]
        L_abs = geo.L * length
        mids, weights = coeffs.strip_atoms(g, idx, off, length, mass)
        w = _cone_weight(measure, mids, weights, L_abs / 2.0, L_abs, x, cone.alpha, measure.m)
        total += c * c * w
    return math.sqrt(total)


def vertical_value(kernel, measure, f, x: float, quad: QuadratureConfig) -> float:
    """V f(x): the t-only square integral at the point x."""
    if isinstance(kernel, CantorKernel):
        total = 0.0
        depth = min(quad.y_resolution_depth, 6)
        for g, off, length, mass, _ in _chain(measure, x, quad.trunc_generation):
            if g + 1 > measure.depth:
                break
            geo = measure.geometry[g + 1]
            in_strip = False
            for j in (1, 2):
                lo = off + geo.child_offsets[j] * length
                hi = lo + geo.child_lengths[j] * length
                if lo <= x <= hi:
                    in_strip = True
                    break
            if not in_strip:
                continue
            c = _node_coefficient(measure, f, off, length, mass, g, depth)
            total += c * c * LN2
        return math.sqrt(total)
    if isinstance(kernel, LogProductKernel):
        if not (0.0 < x < 1.0):
            return 0.0
        A = kernel.f.exponent(Fraction(x))
        return math.sqrt(_logproduct_inner_t(kernel, x, A, 1.0, quad))
    raise InvalidParams("vertical_value supports the Cantor and log-product kernels")


def _logproduct_inner_t(kernel: LogProductKernel, x: float, A: int, t_hi: float,
                        quad: QuadratureConfig) -> float:
    """integral over [e^-A, t_hi] of |theta_t 1(x)|^2 dt/t, exact below saturation.

    theta_t 1(x) = Phi(x/t) - Phi((x-1)/t) saturates to the full phi_v mass 3
    once t <= min(x, 1-x)/2; there the integrand is 9 and the integral is a
    closed-form log length.  The remaining window is at most a few octaves.
    """
    if t_hi <= 0.0 or x <= 0.0 or x >= 1.0:
        return 0.0
    log_lo = -float(A)
    log_hi = math.log(min(t_hi, 1.0))
    if log_hi <= log_lo:
        return 0.0
    t_sat = min(x, 1.0 - x) / 2.0
    log_sat = min(max(math.log(t_sat), log_lo), log_hi)
    total = 9.0 * (log_sat - log_lo)
    # Numeric part on [t_sat, t_hi]: smooth in log t.
    span = log_hi - log_sat
    if span > 0.0:
        steps = max(quad.t_steps_per_band, int(math.ceil(span / LN2 * 16)))
        dv = span / steps
        v = log_sat + (np.arange(steps) + 0.5) * dv
        t = np.exp(v)
        theta = phi_v_antiderivative(x / t) - phi_v_antiderivative((x - 1.0) / t)
        total += float(np.sum(theta**2) * dv)
    return total


# -- L2 operator ratio ----------------------------------------------------------


def _node_coefficient_arrays(measure: CantorMeasure, f: LeafFunction, max_gen: int,
                             atom_extra: int = 2) -> dict[int, np.ndarray]:
    """c_J(f) for every node J at generations 0..max_gen, vectorized.

    Atoms live at depth f.depth + atom_extra; node sums are contiguous
    reshapes because the leaf order is the base-4 path order.
    """
    D = f.depth
    A = min(D + atom_extra, 10)
    starts, lens, masses = measure.leaf_table(A)
    mids = starts + lens / 2.0
    fv = np.repeat(f.values, 4 ** (A - D))
    out = {}
    for n in range(0, max_gen + 1):
        sn, ln_, _ = measure.leaf_table(n)
        blocks = 4 ** (A - n)
        centers = np.repeat(sn + ln_ / 2.0, blocks)
        widths = np.repeat(ln_, blocks)
        phis = bump((mids - centers) / widths)
        integ = (masses * fv * phis).reshape(4**n, blocks).sum(axis=1)
        out[n] = integ / ln_**measure.m
    return out


def l2_operator_ratio(measure: CantorMeasure, f_samples: list[LeafFunction],
                      cone: ConeSpec, quad: QuadratureConfig,
                      context: Optional[CantorSquareContext] = None):
    """max ||S f||^2 / ||f||^2 over leaf-vector samples, with the witness.

    ||S f||^2 = sum_n w(n, alpha) sum_J mu(J) c_J(f)^2; for generations at or
    below the leaf depth, c_J = f_leaf * beta(n) exactly, so those terms
    reduce to g(n, alpha) ||f||^2.
    """
    cone.validate()
    ctx = context if context is not None else CantorSquareContext(measure, quad)
    N = quad.trunc_generation
    best = 0.0
    witness = None
    ratios = []
    for f in f_samples:
        fsq = f.l2_norm_sq()
        if fsq == 0.0:
            ratios.append(0.0)
            continue
        D = min(f.depth, N + 1)
        coeffs = _node_coefficient_arrays(measure, f, D - 1)
        total = 0.0
        for n in range(0, D):
            _, _, mn = measure.leaf_table(n)
            total += ctx.band_weight(n, cone.alpha) * float(np.sum(mn * coeffs[n] ** 2))
        for n in range(D, N + 1):
            g, _ = ctx.g_term(n, cone.alpha)
            total += g * fsq
        ratio = total / fsq
        ratios.append(ratio)
        if ratio > best:
            best = ratio
            witness = f
    return best, witness, ratios


# -- testing functional -----------------------------------------------------------


@dataclass
class CubeTestingValue:
    cube: tuple[float, float]
    box_integral: float
    mass_3r: float
    length: float

    @property
    def ratio(self) -> float:
        return self.box_integral / self.mass_3r if self.mass_3r > 0 else 0.0

    @property
    def per_length(self) -> float:
        return self.box_integral / self.length if self.length > 0 else 0.0


@dataclass
class TestingResult:
    per_cube: list[CubeTestingValue]

    @property
    def sup_ratio(self) -> float:
        return max((c.ratio for c in self.per_cube), default=0.0)

    @property
    def sup_per_length(self) -> float:
        return max((c.per_length for c in self.per_cube), default=0.0)


def _cantor_box_integral(measure: CantorMeasure, ctx: CantorSquareContext,
                         b_scale: float, a: float, b: float, N: int) -> float:
    """Box integral of |theta_t (b_scale * 1)|^2 over [a,b] x (0, b-a).

    theta is constant beta(n) on each strip/band region, so the box integral
    is a sum over generations of beta^2 * (strip mass inside [a,b]) * (log
    measure of the band clipped to t < len(R)).  Bands of nodes inside R fit
    entirely (L_J <= 0.2 len(J) <= 0.2 len(R)); only partial boundary nodes
    need clipping.
    """
    ell = b - a
    if ell <= 0:
        return 0.0
    N = min(N, measure.depth - 1)
    totals = np.zeros(N + 1)
    strip_frac = np.array([ctx.strip_fraction(n) for n in range(N + 1)])

    def rec(g: int, off: float, length: float, mass: float) -> None:
        if off >= b or off + length <= a or g > N:
            return
        if a <= off and off + length <= b:
            # Bulk: every deeper generation of this subtree contributes fully.
            for n in range(g, N + 1):
                totals[n] += mass * strip_frac[n] * LN2
            return
        if g + 1 > measure.depth:
            return
        geo = measure.geometry[g + 1]
        L_abs = geo.L * length
        t_hi, t_lo = min(L_abs, ell), L_abs / 2.0
        if t_hi > t_lo:
            sm = 0.0
            for j in (1, 2):
                lo = off + geo.child_offsets[j] * length
                hi = lo + geo.child_lengths[j] * length
                ca, cb = max(lo, a), min(hi, b)
                if cb > ca:
                    sm += measure._mass_rec(
                        g + 1, lo, geo.child_lengths[j] * length,
                        mass * geo.child_masses[j], ca, cb,
                    )
            totals[g] += sm * math.log(t_hi / t_lo)
        for j in range(4):
            rec(
                g + 1,
                off + geo.child_offsets[j] * length,
                geo.child_lengths[j] * length,
                mass * geo.child_masses[j],
            )

    rec(0, 0.0, 1.0, 1.0)
    betas = np.array([ctx.beta(n) for n in range(N + 1)])
    return float(b_scale**2 * np.sum(betas**2 * totals))


def _logproduct_box_integral(kernel: LogProductKernel, a: Fraction, b: Fraction,
                             quad: QuadratureConfig) -> float:
    """Box integral of |theta_t 1|^2 over [a,b] x (0, b-a) for the log-product kernel.

    x integration is exact over the segments where the exponent A(x) is
    constant (2-point Gauss per segment; theta varies smoothly there).
    """
    ell = float(b - a)
    if ell <= 0:
        return 0.0
    total = 0.0
    gauss = (0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0))
    for lo, hi, A in _segments(kernel.f, Fraction(a), Fraction(b), 10**6):
        w = float(hi - lo)
        flo = float(lo)
        acc = 0.0
        for gpt in gauss:
            x = flo + gpt * w
            acc += _logproduct_inner_t(kernel, x, A, ell, quad)
        total += w * acc / len(gauss)
    return total


def testing_functional(kernel, measure, b, cubes, quad: QuadratureConfig,
                       context: Optional[CantorSquareContext] = None) -> TestingResult:
    """sup over cubes R of mu(3R)^-1 * box integral of |theta_t b|^2.

    b may be None (identically 1) or a scalar.  Cubes are (a, b) interval
    pairs; per-cube values carry both the mu(3R) and len(R) normalizations.
    """
    if not cubes:
        raise EmptyCubeList("testing functional needs at least one cube")
    if b is None:
        b_scale = 1.0
    elif isinstance(b, (int, float)):
        b_scale = float(b)
    else:
        raise InvalidParams("testing_functional supports b None (=1) or scalar")
    per_cube = []
    if isinstance(kernel, CantorKernel):
        ctx = context if context is not None else CantorSquareContext(measure, quad)
        for (ca, cb) in cubes:
            box = _cantor_box_integral(measure, ctx, b_scale, ca, cb, quad.trunc_generation)
            mid, half = (ca + cb) / 2.0, (cb - ca) / 2.0
            m3 = measure.interval_mass(mid - 3 * half, mid + 3 * half)
            per_cube.append(CubeTestingValue((ca, cb), box, m3, cb - ca))
        return TestingResult(per_cube)
    if isinstance(kernel, LogProductKernel):
        for (ca, cb) in cubes:
            fa, fb = Fraction(ca), Fraction(cb)
            box = b_scale**2 * _logproduct_box_integral(kernel, fa, fb, quad)
            mid, half = float(fa + fb) / 2.0, float(fb - fa) / 2.0
            m3 = measure.interval_mass(mid - 3 * half, mid + 3 * half)
            per_cube.append(CubeTestingValue((float(fa), float(fb)), box, m3, float(fb - fa)))
        return TestingResult(per_cube)
    raise InvalidParams("testing_functional supports the Cantor and log-product kernels")


def _ci_segment_table(f, max_depth: int):
    """Global segment decomposition for the C_I sweep, as exact floats.

    Breakpoints: every demo piece endpoint (all dyadic, hence exact doubles),
    every depth-max_depth cube boundary (so segments never straddle a cube at
    any shallower level), and geometric subdivision points near 0 and 1
    (the saturation scale min(x, 1-x) varies fast there).  The per-segment
    exponent A is evaluated by exact integer residue arithmetic on the
    segment midpoint.
    """
    pts = [float(p) for p in f.breakpoints()]
    pts.extend((np.arange(2**max_depth + 1) / 2**max_depth).tolist())
    oct_pts = 2.0 ** (-(np.arange(1, 481)) / 8.0)
    pts.extend(oct_pts.tolist())
    pts.extend((1.0 - oct_pts).tolist())
    bp = np.unique(np.asarray(pts, dtype=float))
    bp = bp[(bp >= 0.0) & (bp <= 1.0)]
    mids = (bp[:-1] + bp[1:]) / 2.0
    A = np.zeros(len(mids))
    fams = [(F.a_n, F.k_exp, F.total_measure) for F in f.factors]
    for i, x in enumerate(mids):
        p, q = x.as_integer_ratio()
        acc = 0
        for a_n, k_exp, tot in fams:
            # x*k mod 1 <= |E|  <=>  ((p << k_exp) mod q) * tot.den <= q * tot.num
            if ((p << k_exp) % q) * tot.denominator <= q * tot.numerator:
                acc += a_n
        A[i] = acc
    return bp, mids, A


def ci_profile(kernel: LogProductKernel, max_depth: int, quad: QuadratureConfig) -> dict:
    """C_I / len(I) for every dyadic I in [0,1] down to max_depth.

    theta_t 1(x) is exactly the full phi_v mass 3 once t <= min(x,1-x)/2 and
    exactly constant in x between exponent breakpoints, so the inner integral
    is closed-form except on a geometrically thin boundary zone, which is
    batched on a log-t grid.  Returns the sup ratio, the per-depth sups, and
    the witness cube.
    """
    steps = max(24, quad.t_steps_per_band)
    bp, mids, A = _ci_segment_table(kernel.f, max_depth)
    widths = np.diff(bp)
    sat = np.maximum(np.minimum(mids, 1.0 - mids) / 2.0, 1e-300)
    ln_sat = np.log(sat)
    per_depth = {}
    sup = 0.0
    witness = (0, 0)
    for d in range(0, max_depth + 1):
        ell = 0.5**d
        lnL = math.log(ell)
        # Saturated part: 9 * (length of [max(-A, min(ln sat, lnL)) .. ] below lnL).
        upper = np.minimum(ln_sat, lnL)
        closed = 9.0 * np.maximum(0.0, upper + A)
        inner = closed
        lo = np.maximum(ln_sat, -A)
        mask = lo < lnL
        if mask.any():
            span = lnL - lo[mask]
            u = (np.arange(steps) + 0.5) / steps
            lnT = lo[mask, None] + span[:, None] * u[None, :]
            t = np.exp(lnT)
            x = mids[mask, None]
            theta = phi_v_antiderivative(x / t) - phi_v_antiderivative((x - 1.0) / t)
            numeric = span * np.mean(theta**2, axis=1)
            inner = closed.copy()
            inner[mask] += numeric
        cube = np.floor(mids / ell).astype(int)
        boxes = np.bincount(cube, weights=widths * inner, minlength=2**d)
        ratios = boxes / ell
        k = int(np.argmax(ratios))
        per_depth[d] = float(ratios[k])
        if ratios[k] > sup:
            sup = float(ratios[k])
            witness = (d, k)
    return {"sup": sup, "per_depth": per_depth, "witness": witness}


# -- weak (1,1) -------------------------------------------------------------------


@dataclass
class Weak11Result:
    sup_value: float
    witness_lambda: float
    l1_norm: float
    per_lambda: list[tuple[float, float]]


def weak11_functional(kernel, measure, f: LeafFunction, lambda_grid, quad: QuadratureConfig,
                      cone: Optional[ConeSpec] = None) -> Weak11Result:
    """sup over lambda of lambda * mu{S f > lambda} / ||f||_1.

    S f is evaluated at leaf resolution: one value per validation-depth leaf,
    level sets measured by summing leaf masses.  Finer level-set structure is
    below truncation and intentionally out of reach.
    """
    if not isinstance(kernel, CantorKernel):
        raise InvalidParams("weak11_functional is defined for the Cantor kernel")
    cone = cone if cone is not None else ConeSpec(alpha=1.0, m=measure.m)
    l1 = f.l1_norm()
    if l1 == 0.0:
        return Weak11Result(0.0, 0.0, 0.0, [(float(l), 0.0) for l in lambda_grid])
    starts, lens, masses = measure.leaf_table(f.depth)
    mids = starts + lens / 2.0
    cache = _CoeffCache(measure, f, min(quad.y_resolution_depth, 6))
    values = np.array(
        [conical_value(kernel, measure, f, x, cone, quad, coeffs=cache) for x in mids]
    )
    per_lambda = []
    sup_value, witness = 0.0, 0.0
    for lam in lambda_grid:
        lam = float(lam)
        level = float(np.sum(masses[values > lam]))
        v = lam * level / l1
        per_lambda.append((lam, v))
        if v > sup_value:
            sup_value, witness = v, lam
    return Weak11Result(sup_value, witness, l1, per_lambda)


# -- S vs tilde-V dual routes -----------------------------------------------------


def snorm_by_x_integration(measure: CantorMeasure, f, cone: ConeSpec,
                           quad: QuadratureConfig, x_depth: int = 4) -> float:
    """||S f||^2 by integrating S f(x)^2 over x at leaf resolution.

    x resolution must exceed the truncation generation, otherwise leaf
    midpoints sit in the middle gaps of the finest nodes and miss their
    strip contributions entirely.
    """
    kernel = CantorKernel(measure)
    x_depth = max(x_depth, quad.trunc_generation + 1)
    starts, lens, masses = measure.leaf_table(x_depth)
    mids = starts + lens / 2.0
    cache = _CoeffCache(measure, f, min(quad.y_resolution_depth, 6))
    vals = np.array(
        [conical_value(kernel, measure, f, x, cone, quad, coeffs=cache) ** 2 for x in mids]
    )
    return float(np.sum(vals * masses))


def snorm_by_tilde_route(measure: CantorMeasure, f, quad: QuadratureConfig,
                         x_depth: int = 4) -> float:
    """||tilde-V f||^2: vertical square integral of the tilde-transformed kernel.

    theta~_t f(x) = sqrt(mu(B(x,t))/t^m) theta_t f(x); on a strip/band region
    the theta factor is the node coefficient, and the ball factor is
    integrated pointwise in x, here at leaf-atom resolution.
    """
    N = quad.trunc_generation
    if N > 6:
        raise InvalidParams("the tilde route enumerates all nodes; keep N <= 6")
    total = 0.0
    m = measure.m
    depth = min(quad.y_resolution_depth, 6)

    def rec(g, off, length, mass):
        nonlocal total
        if g > N or g + 1 > measure.depth:
            return
        geo = measure.geometry[g + 1]
        L_abs = geo.L * length
        c = _node_coefficient(measure, f, off, length, mass, g, depth)
        if c != 0.0:
            extra = min(x_depth, measure.depth - g - 1)
            amids, aw = [], []
            for j in (1, 2):
                mj, _, wj = node_atoms(
                    measure,
                    off + geo.child_offsets[j] * length,
                    geo.child_lengths[j] * length,
                    mass * geo.child_masses[j],
                    g + 1,
                    extra,
                )
                amids.append(mj)
                aw.append(wj)
            amids = np.concatenate(amids)
            aw = np.concatenate(aw)
            # Full ball mass around each strip atom: balls stay inside the
            # node, so the node's own atoms carry all the mass.
            ymids, _, yw = node_atoms(measure, off, length, mass, g, extra + 1)
            tails = _band_tail_weight(
                np.abs(amids[:, None] - ymids[None, :]), L_abs / 2.0, L_abs, 1.0, m
            )
            total += c * c * float(aw @ tails @ yw)
        for j in range(4):
            rec(
                g + 1,
                off + geo.child_offsets[j] * length,
                geo.child_lengths[j] * length,
                mass * geo.child_masses[j],
            )

    rec(0, 0.0, 1.0, 1.0)
    return total
