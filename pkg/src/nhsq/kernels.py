"""Kernel families s_t(x,y), their transforms, and size/continuity samplers.

Two concrete kernels:

* CantorKernel: active when x lies in the two middle children of some node I
  of the construction tree and t is in the node's band [L_I/2, L_I]; there it
  equals a smooth bump adapted to I over len(I)**m.  It is deliberately
  discontinuous in x across strip boundaries -- no first-variable regularity
  is ever used.
* LogProductKernel: phi_{V,t}(x - y) for x in [0,1] and f(x) <= t <= 1, zero
  otherwise, with m = alpha = 1.

The size and continuity checkers are samplers, not proofs: they stratify
over the kernels' active bands, add adversarial edge points, and report the
worst observed ratio with its witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .logproduct import LogProductFn
from .measures import CantorMeasure
from .rng import derive_rng

__all__ = [
    "bump",
    "bump_lipschitz",
    "phi_v",
    "phi_v_antiderivative",
    "PHI_V_LIPSCHITZ",
    "PHI_V_TOTAL",
    "ActiveRegion",
    "CantorKernel",
    "LogProductKernel",
    "TildeKernel",
    "StepKernel",
    "cantor_kernel",
    "logproduct_kernel",
    "tilde_transform",
    "eval_theta",
    "node_atoms",
    "check_size_condition",
    "check_holder_condition",
    "ConditionReport",
    "HolderReport",
]


# -- profiles -------------------------------------------------------------------


def bump(u):
    """cos^2(pi u) on [-1/2, 1/2]: even, vanishing at the endpoints, peak 1 at 0."""
    u = np.asarray(u, dtype=float)
    out = np.where(np.abs(u) <= 0.5, np.cos(np.pi * u) ** 2, 0.0)
    return out if out.ndim else float(out)


def bump_lipschitz() -> float:
    """sup |d/du cos^2(pi u)| = pi."""
    return math.pi


def phi_v(z):
    """1 on [-1,1], C^1 smoothstep ramp to 0 on [1,2], even, support [-2,2]."""
    z = np.abs(np.asarray(z, dtype=float))
    u = np.clip(z - 1.0, 0.0, 1.0)
    ramp = 1.0 - 3.0 * u**2 + 2.0 * u**3
    out = np.where(z <= 2.0, ramp, 0.0)
    return out if out.ndim else float(out)


def _phi_v_half_integral(z):
    """integral of phi_v over [0, z] for z >= 0 (phi_v is even)."""
    z = np.asarray(z, dtype=float)
    core = np.minimum(z, 1.0)
    u = np.clip(z - 1.0, 0.0, 1.0)
    ramp = u - u**3 + u**4 / 2.0
    return core + ramp


def phi_v_antiderivative(z):
    """Phi(z) = integral of phi_v over (-inf, z]; Phi(inf) = 3."""
    z = np.asarray(z, dtype=float)
    out = 1.5 + np.sign(z) * _phi_v_half_integral(np.abs(z))
    return out if out.ndim else float(out)


PHI_V_LIPSCHITZ = 1.5  # max of |d/du (1 - 3u^2 + 2u^3)| at u = 1/2
PHI_V_TOTAL = 3.0  # integral of phi_v over the line


# -- Cantor kernel ----------------------------------------------------------------


@dataclass(frozen=True)
class ActiveRegion:
    """The unique node I with x in its middle strip and t in [L_I/2, L_I]."""

    generation: int  # local generation of I (0 = root)
    offset: float
    length: float
    mass: float
    t_lo: float
    t_hi: float
    strips: tuple[tuple[float, float], tuple[float, float]]


class CantorKernel:
    """s_t(x,y) = bump_I(y) / len(I)**m on the active strip/band pairs, else 0.

    Constant in x across the active strip, so it carries no x-regularity;
    the declared exponents are (m, alpha=1).
    """

    def __init__(self, measure: CantorMeasure, alpha: float = 1.0):
        self.measure = measure
        self.m = measure.m
        self.alpha = alpha

    def locate(self, x: float, t: float) -> Optional[ActiveRegion]:
        """Walk x's node chain; bands decrease strictly, so at most one hit."""
        meas = self.measure
        off, length, mass = 0.0, 1.0, 1.0
        if not (0.0 <= x <= 1.0) or t <= 0.0:
            return None
        for g in range(0, meas.depth):
            geo = meas.geometry[g + 1]
            L_abs = geo.L * length
            if t > L_abs:
                return None
            if t >= L_abs / 2.0:
                strips = tuple(
                    (
                        off + geo.child_offsets[j] * length,
                        off + (geo.child_offsets[j] + geo.child_lengths[j]) * length,
                    )
                    for j in (1, 2)
                )
                for lo, hi in strips:
                    if lo <= x <= hi:
                        return ActiveRegion(
                            generation=g,
                            offset=off,
                            length=length,
                            mass=mass,
                            t_lo=L_abs / 2.0,
                            t_hi=L_abs,
                            strips=strips,
                        )
                return None
            # Descend into the child containing x.
            nxt = None
            for j in range(4):
                coff = off + geo.child_offsets[j] * length
                clen = geo.child_lengths[j] * length
                if coff <= x <= coff + clen:
                    nxt = (coff, clen, mass * geo.child_masses[j])
                    break
            if nxt is None:
                return None
            off, length, mass = nxt
        return None

    def evaluate(self, t: float, x: float, y) -> float:
        act = self.locate(x, t)
        if act is None:
            y = np.asarray(y, dtype=float)
            return np.zeros_like(y) if y.ndim else 0.0
        center = act.offset + act.length / 2.0
        return bump((np.asarray(y, dtype=float) - center) / act.length) / act.length**self.m

    def sample_active(self, rng: np.random.Generator, n: int):
        """Stratified (t, x) pairs over strips and bands, plus edge points."""
        meas = self.measure
        gens = list(range(0, min(meas.depth, 6)))
        out = []
        per = max(1, n // max(1, len(gens)))
        for g in gens:
            for _ in range(per):
                # Random node at generation g via a random child path.
                off, length = 0.0, 1.0
                for k in range(1, g + 1):
                    geo = meas.geometry[k]
                    j = int(rng.integers(0, 4))
                    off += geo.child_offsets[j] * length
                    length *= geo.child_lengths[j]
                geo = meas.geometry[g + 1]
                L_abs = geo.L * length
                j = 1 if rng.random() < 0.5 else 2
                lo = off + geo.child_offsets[j] * length
                hi = lo + geo.child_lengths[j] * length
                u = rng.random()
                if u < 0.15:
                    x = lo  # strip edge
                elif u < 0.3:
                    x = hi
                else:
                    x = rng.uniform(lo, hi)
                v = rng.random()
                if v < 0.15:
                    t = L_abs / 2.0  # band edge
                elif v < 0.3:
                    t = L_abs
                else:
                    t = math.exp(rng.uniform(math.log(L_abs / 2.0), math.log(L_abs)))
                out.append((t, x, (off, length)))
        return out

    def sample_y(self, rng: np.random.Generator, t: float, x: float, node) -> float:
        off, length = node
        u = rng.random()
        if u < 0.2:
            return off  # support edge of the bump
        if u < 0.4:
            return off + length
        return rng.uniform(off, length + off)


class LogProductKernel:
    """s_t(x,y) = phi_{V,t}(x-y) when x in [0,1] and f(x) <= t <= 1, else 0."""

    def __init__(self, f: LogProductFn):
        self.f = f
        self.m = 1.0
        self.alpha = 1.0

    def active(self, x: float, t: float) -> bool:
        if not (0.0 <= x <= 1.0) or not (0.0 < t <= 1.0):
            return False
        # Comparison in log space: t >= e^-A  <=>  ln t >= -A (A exact integer).
        A = self.f.exponent(Fraction(x))
        return math.log(t) >= -A

    def evaluate(self, t: float, x: float, y) -> float:
        y = np.asarray(y, dtype=float)
        if not self.active(x, t):
            return np.zeros_like(y) if y.ndim else 0.0
        out = np.asarray(phi_v((x - y) / t)) / t
        return out if out.ndim else float(out)

    def theta_one(self, t: float, x: float) -> float:
        """theta_t 1_[0,1](x) in closed form via the phi_v antiderivative."""
        if not self.active(x, t):
            return 0.0
        return float(
            phi_v_antiderivative(x / t) - phi_v_antiderivative((x - 1.0) / t)
        )

    def sample_active(self, rng: np.random.Generator, n: int):
        out = []
        for _ in range(n):
            x = rng.random()
            A = self.f.exponent(Fraction(x))
            t_lo = max(math.exp(-min(A, 30)), 1e-9)
            t = math.exp(rng.uniform(math.log(t_lo), 0.0))
            out.append((t, x, None))
        return out

    def sample_y(self, rng: np.random.Generator, t: float, x: float, node) -> float:
        u = rng.random()
        if u < 0.2:
            return x + 2.0 * t  # support edge
        if u < 0.3:
            return x - t  # plateau edge
        return x + rng.uniform(-2.5 * t, 2.5 * t)


class TildeKernel:
    """(mu(B(x,t)) / t**m)**(1/2) * s_t(x,y); declared exponents unchanged."""

    def __init__(self, base, measure):
        self.base = base
        self.measure = measure
        self.m = base.m
        self.alpha = base.alpha

    def factor(self, t: float, x: float) -> float:
        return math.sqrt(self.measure.ball_mass(x, t) / t**self.m)

    def evaluate(self, t: float, x: float, y):
        return self.factor(t, x) * self.base.evaluate(t, x, y)

    def sample_active(self, rng, n):
        return self.base.sample_active(rng, n)

    def sample_y(self, rng, t, x, node):
        return self.base.sample_y(rng, t, x, node)


class StepKernel:
    """Adversarial fixture: piecewise constant in y, hence not Hoelder."""

    def __init__(self, m: float = 0.4, alpha: float = 1.0):
        self.m = m
        self.alpha = alpha

    def evaluate(self, t: float, x: float, y):
        y = np.asarray(y, dtype=float)
        inside = np.abs(x - y) <= 2.0 * t
        out = np.where(inside & (y >= x), t**self.alpha / t**(self.m + self.alpha), 0.0)
        return out if out.ndim else float(out)

    def sample_active(self, rng, n):
        return [(math.exp(rng.uniform(math.log(0.05), 0.0)), rng.random(), None) for _ in range(n)]

    def sample_y(self, rng, t, x, node):
        u = rng.random()
        if u < 0.25:
            return x  # the step location
        if u < 0.5:
            return x + 2.0 * t  # support edge
        return x + rng.uniform(-2.0 * t, 2.0 * t)


def cantor_kernel(measure: CantorMeasure, alpha: float = 1.0) -> CantorKernel:
    return CantorKernel(measure, alpha)


def logproduct_kernel(f: LogProductFn) -> LogProductKernel:
    return LogProductKernel(f)


def tilde_transform(kernel, measure) -> TildeKernel:
    return TildeKernel(kernel, measure)


# -- theta quadrature ---------------------------------------------------------------


def node_atoms(measure: CantorMeasure, off: float, length: float, mass: float,
               local_gen: int, extra_depth: int):
    """(midpoints, widths, weights) of the measure restricted to one node.

    Expands the subdivision tree extra_depth more levels; below the
    truncation depth leaves split uniformly (mass proportional to length),
    matching the measure's below-truncation convention.
    """
    offs = np.array([off])
    lens = np.array([length])
    mas = np.array([mass])
    for k in range(local_gen + 1, local_gen + extra_depth + 1):
        if k <= measure.depth:
            geo = measure.geometry[k]
            o = np.asarray(geo.child_offsets)
            l = np.asarray(geo.child_lengths)
            q = np.asarray(geo.child_masses)
        else:
            o = np.array([0.0, 0.25, 0.5, 0.75])
            l = np.array([0.25, 0.25, 0.25, 0.25])
            q = np.array([0.25, 0.25, 0.25, 0.25])
        offs = (offs[:, None] + o[None, :] * lens[:, None]).ravel()
        mas = (mas[:, None] * q[None, :]).ravel()
        lens = (lens[:, None] * l[None, :]).ravel()
    return offs + lens / 2.0, lens, mas


def eval_theta(kernel, measure, f: Optional[Callable], t: float, x: float, quad) -> float:
    """theta_t f(x) = integral of s_t(x, y) f(y) against the measure.

    f = None means f identically 1.  Adaptive to the kernel's support: the
    Cantor kernel integrates over its active node by tree descent, the
    log-product kernel over [x - 2t, x + 2t] by midpoint rule.
    """
    depth = getattr(quad, "y_resolution_depth", 6)
    if isinstance(kernel, TildeKernel):
        return kernel.factor(t, x) * eval_theta(kernel.base, measure, f, t, x, quad)
    if isinstance(kernel, CantorKernel):
        act = kernel.locate(x, t)
        if act is None:
            return 0.0
        extra = min(depth, measure.depth - act.generation + 4)
        mids, widths, weights = node_atoms(
            measure, act.offset, act.length, act.mass, act.generation, extra
        )
        center = act.offset + act.length / 2.0
        vals = bump((mids - center) / act.length) / act.length**kernel.m
        fy = 1.0 if f is None else np.asarray([f(v) for v in mids])
        return float(np.sum(weights * vals * fy))
    # Generic path: midpoint quadrature over the kernel's y-support window.
    lo, hi = x - 2.0 * t, x + 2.0 * t
    if hasattr(measure, "a"):
        lo, hi = max(lo, measure.a), min(hi, measure.b)
    if hi <= lo:
        return 0.0
    n = max(64, 2**depth)
    ys = np.linspace(lo, hi, n, endpoint=False) + (hi - lo) / (2 * n)
    w = (hi - lo) / n
    sv = kernel.evaluate(t, x, ys)
    fy = 1.0 if f is None else np.asarray([f(v) for v in ys])
    return float(np.sum(sv * fy) * w)


# -- condition checkers ----------------------------------------------------------


@dataclass
class ConditionReport:
    worst_ratio: float
    witness: tuple[float, float, float]
    n_samples: int


@dataclass
class HolderReport:
    worst_ratio: float
    witness: tuple[float, float, float, float]
    per_scale: list[tuple[float, float]]  # (separation scale, worst ratio at that scale)
    per_scale_anchored: list[tuple[float, float]]  # pairs with (t, x, y) held fixed
    n_samples: int

    @property
    def scale_growth(self) -> float:
        """Anchored worst-ratio growth across the finest two separation decades.

        Anchored pairs keep (t, x, y) fixed while |y-z| shrinks, so the
        (t + |x-y|) factor is scale-independent and a genuine Hoelder
        violation shows the full 10x growth per decade.
        """
        usable = [r for _, r in self.per_scale_anchored if r > 0]
        if len(usable) < 2:
            return 0.0
        return usable[-1] / usable[-2]

    @property
    def looks_unbounded(self) -> bool:
        """Heuristic flag: ratios grew close to 10x per decade of separation."""
        return self.scale_growth >= 8.0


def check_size_condition(kernel, n_samples: int, seed: int) -> ConditionReport:
    """Worst |s_t(x,y)| (t + |x-y|)^(m+alpha) / t^alpha over stratified samples."""
    rng = derive_rng(seed, "size-condition")
    m, alpha = kernel.m, kernel.alpha
    worst, witness = 0.0, (0.0, 0.0, 0.0)
    actives = kernel.sample_active(rng, n_samples)
    for t, x, node in actives:
        for _ in range(3):
            y = kernel.sample_y(rng, t, x, node)
            val = abs(float(kernel.evaluate(t, x, y)))
            if val == 0.0:
                continue
            ratio = val * (t + abs(x - y)) ** (m + alpha) / t**alpha
            if ratio > worst:
                worst, witness = ratio, (t, x, y)
    return ConditionReport(worst_ratio=worst, witness=witness, n_samples=len(actives) * 3)


def check_holder_condition(kernel, n_samples: int, seed: int, n_scales: int = 4) -> HolderReport:
    """Worst |s_t(x,y) - s_t(x,z)| (t + |x-y|)^(m+alpha) / |y-z|^alpha.

    Pairs satisfy |y - z| < t/2 and are stratified over separation scales
    t/2 * 10^-j so a genuinely non-Hoelder kernel shows ratio growth as the
    separation shrinks.
    """
    rng = derive_rng(seed, "holder-condition")
    m, alpha = kernel.m, kernel.alpha
    worst, witness = 0.0, (0.0, 0.0, 0.0, 0.0)
    per_scale = [0.0] * n_scales
    per_anchor = [0.0] * n_scales
    scales = [0.4 * 10.0**-j for j in range(n_scales)]
    actives = kernel.sample_active(rng, max(1, n_samples // n_scales))
    for t, x, node in actives:
        # One sampled center per active; reused across scales so per-scale
        # worst ratios are comparable and growth is detectable.
        y0 = kernel.sample_y(rng, t, x, node)
        for j, frac in enumerate(scales):
            delta = t * frac  # < t/2 by construction
            # Anchored pairs keep the evaluation point fixed; the moving pairs
            # straddle the sampled point and x, where x-anchored kernel
            # features (steps, plateau edges) live.
            anchored = ((y0, y0 + delta), (y0, y0 - delta), (x, x - delta))
            moving = ((y0 + delta / 2, y0 - delta / 2), (x + delta / 2, x - delta / 2))
            for is_anchored, group in ((True, anchored), (False, moving)):
                for y, z in group:
                    dv = abs(float(kernel.evaluate(t, x, y)) - float(kernel.evaluate(t, x, z)))
                    if dv == 0.0:
                        continue
                    ratio = dv * (t + abs(x - y)) ** (m + alpha) / delta**alpha
                    if ratio > per_scale[j]:
                        per_scale[j] = ratio
                    if is_anchored and ratio > per_anchor[j]:
                        per_anchor[j] = ratio
                    if ratio > worst:
                        worst, witness = ratio, (t, x, y, z)
    return HolderReport(
        worst_ratio=worst,
        witness=witness,
        per_scale=[(s, r) for s, r in zip(scales, per_scale)],
        per_scale_anchored=[(s, r) for s, r in zip(scales, per_anchor)],
        n_samples=len(actives) * n_scales * 5,
    )
