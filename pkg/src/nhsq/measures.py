"""Cantor-type measure with exact mass queries, plus Lebesgue and atomic measures.

The measure lives on [0,1] and is built by a four-child subdivision rule:
a node at generation n-1 with mass mu splits into children with masses

    [q, mu/(C*n), mu/(C*n), q],     q = mu * (1 - 2/(C*n)) / 2,

and every node satisfies mass = length**m exactly, which forces the child
lengths.  The outer children share both endpoints with the parent, the two
middle children sit at distance 2L from the parent ends (L = outer-child
length), so the outer gaps have width exactly L.

Because the child mass *ratios* and relative lengths depend only on the
splitting index n, the geometry cache is O(depth) instead of O(4**depth),
and the normalized measure inside any generation-n node is the same
"template" measure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    GeometryInfeasible,
    InvalidParams,
    NegativeRadius,
    OutOfRange,
    ReversedInterval,
)
from .rng import derive_rng

__all__ = [
    "CantorParams",
    "NodeGeometry",
    "CantorMeasure",
    "LebesgueInterval",
    "PointMasses",
    "GrowthEstimate",
    "build_cantor",
    "template_measure",
    "node_geometry",
    "growth_constant",
]


@dataclass(frozen=True)
class CantorParams:
    """Parameters of the subdivision rule.

    m must lie in (0, 1/2) and C must be at least 4.  start_gen selects the
    template: the measure's local generation-k children split with index
    start_gen + k, so start_gen = 0 is the full measure rooted at [0,1] and
    start_gen = n is the normalized measure inside a generation-n node.
    """

    m: float = 0.4
    C: float = 16.0
    depth: int = 8
    start_gen: int = 0

    def validate(self) -> None:
        if not (0.0 < self.m < 0.5):
            raise InvalidParams(f"m must be in (0, 1/2), got {self.m}")
        if self.C < 4.0:
            raise InvalidParams(f"C must be >= 4, got {self.C}")
        if self.depth < 0:
            raise InvalidParams(f"depth must be >= 0, got {self.depth}")
        if self.start_gen < 0:
            raise InvalidParams(f"start_gen must be >= 0, got {self.start_gen}")


@dataclass(frozen=True)
class NodeGeometry:
    """Normalized child layout of one subdivision (parent scaled to [0,1], mass 1).

    generation is the splitting index n >= 1 of the rule; all nodes split
    with the same index share this layout up to the parent's affine map.
    """

    generation: int
    parent_length: float
    child_offsets: tuple[float, float, float, float]
    child_lengths: tuple[float, float, float, float]
    child_masses: tuple[float, float, float, float]
    L: float

    @property
    def middle_gap(self) -> float:
        return self.child_offsets[2] - (self.child_offsets[1] + self.child_lengths[1])

    @property
    def strip_mass(self) -> float:
        """Mass fraction of the two middle children."""
        return self.child_masses[1] + self.child_masses[2]


def _split_geometry(n: int, m: float, C: float) -> NodeGeometry:
    # Renormalize so child masses sum to the parent mass exactly in floats.
    q_mid = 1.0 / (C * n)
    q_out = 0.5 * (1.0 - 2.0 * q_mid)
    if q_out <= 0.0:
        raise GeometryInfeasible(f"outer-child mass non-positive at index {n}")
    masses = np.array([q_out, q_mid, q_mid, q_out], dtype=float)
    masses /= masses.sum()
    lengths = masses ** (1.0 / m)
    L = float(lengths[0])
    offsets = (0.0, 2.0 * L, 1.0 - 2.0 * L - float(lengths[2]), 1.0 - L)
    geo = NodeGeometry(
        generation=n,
        parent_length=1.0,
        child_offsets=offsets,
        child_lengths=tuple(float(v) for v in lengths),
        child_masses=tuple(float(v) for v in masses),
        L=L,
    )
    if geo.middle_gap < 0.0:
        raise GeometryInfeasible(
            f"negative middle gap at index {n}: m={m}, C={C} violate the separation rule"
        )
    return geo


class CantorMeasure:
    """Truncated self-similar measure on [0,1] with exact interval masses.

    Below the truncation depth, the mass of each leaf is spread uniformly
    over the leaf interval; this keeps interval_mass additive and
    total-mass exact at every query resolution.
    """

    def __init__(self, params: CantorParams):
        params.validate()
        self.params = params
        self.geometry: dict[int, NodeGeometry] = {}
        for k in range(1, params.depth + 1):
            self.geometry[k] = _split_geometry(params.start_gen + k, params.m, params.C)
        self.total_mass = 1.0
        self._leaf_cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._cdf_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    # -- geometry -----------------------------------------------------------

    @property
    def depth(self) -> int:
        return self.params.depth

    @property
    def m(self) -> float:
        return self.params.m

    def split_geometry(self, local_gen: int) -> NodeGeometry:
        """Child layout used when a local generation-(local_gen - 1) node splits."""
        if not (1 <= local_gen <= self.depth):
            raise OutOfRange(f"generation {local_gen} outside 1..{self.depth}")
        return self.geometry[local_gen]

    def template(self, n: int, depth: Optional[int] = None) -> "CantorMeasure":
        """Normalized measure inside a generation-(start_gen + n) node."""
        d = self.depth if depth is None else depth
        return CantorMeasure(
            CantorParams(self.m, self.params.C, d, self.params.start_gen + n)
        )

    # -- mass queries --------------------------------------------------------

    def interval_mass(self, a: float, b: float) -> float:
        """Exact mu([a,b]) of the truncated measure (leaf mass spread uniformly)."""
        if b < a:
            raise ReversedInterval(f"need a <= b, got [{a}, {b}]")
        a = max(a, 0.0)
        b = min(b, 1.0)
        if b <= a:
            return 0.0
        return self._mass_rec(0, 0.0, 1.0, 1.0, a, b)

    def _mass_rec(self, k: int, off: float, length: float, mass: float, a: float, b: float) -> float:
        if a <= off and off + length <= b:
            return mass
        if b <= off or off + length <= a:
            return 0.0
        if k == self.depth:
            return mass * (min(b, off + length) - max(a, off)) / length
        geo = self.geometry[k + 1]
        total = 0.0
        for j in range(4):
            coff = off + geo.child_offsets[j] * length
            clen = geo.child_lengths[j] * length
            if b <= coff or coff + clen <= a:
                continue
            total += self._mass_rec(k + 1, coff, clen, mass * geo.child_masses[j], a, b)
        return total

    def ball_mass(self, x: float, r: float) -> float:
        if r < 0.0:
            raise NegativeRadius(f"radius {r} < 0")
        if r == 0.0:
            return 0.0
        return self.interval_mass(x - r, x + r)

    # -- leaf decompositions --------------------------------------------------

    def leaf_table(self, max_depth: Optional[int] = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(starts, lengths, masses) of all leaves at min(depth, max_depth)."""
        d = self.depth if max_depth is None else min(max_depth, self.depth)
        if d > 10:
            raise InvalidParams(
                f"leaf enumeration at depth {d} would materialize 4**{d} leaves; "
                "pass an explicit max_depth <= 10"
            )
        if d not in self._leaf_cache:
            starts = np.array([0.0])
            lengths = np.array([1.0])
            masses = np.array([1.0])
            for k in range(1, d + 1):
                geo = self.geometry[k]
                off = np.asarray(geo.child_offsets)
                clen = np.asarray(geo.child_lengths)
                cmass = np.asarray(geo.child_masses)
                starts = (starts[:, None] + off[None, :] * lengths[:, None]).ravel()
                masses = (masses[:, None] * cmass[None, :]).ravel()
                lengths = (lengths[:, None] * clen[None, :]).ravel()
            self._leaf_cache[d] = (starts, lengths, masses)
        return self._leaf_cache[d]

    def cdf_table(self, max_depth: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
        """Breakpoints and values of the piecewise-linear CDF at leaf resolution.

        Exact for the truncated measure when max_depth >= depth; otherwise it
        is the CDF of the measure uniformized at max_depth.
        """
        d = self.depth if max_depth is None else min(max_depth, self.depth)
        if d not in self._cdf_cache:
            starts, lengths, masses = self.leaf_table(d)
            cum = np.concatenate([[0.0], np.cumsum(masses)])
            xs = np.empty(2 * len(starts), dtype=float)
            fs = np.empty_like(xs)
            xs[0::2] = starts
            xs[1::2] = starts + lengths
            fs[0::2] = cum[:-1]
            fs[1::2] = cum[1:]
            self._cdf_cache[d] = (xs, fs)
        return self._cdf_cache[d]

    def cdf(self, x: np.ndarray, max_depth: Optional[int] = None) -> np.ndarray:
        xs, fs = self.cdf_table(max_depth)
        return np.interp(x, xs, fs, left=0.0, right=1.0)

    def interval_mass_batch(self, a: np.ndarray, b: np.ndarray, max_depth: Optional[int] = None) -> np.ndarray:
        """Vectorized interval masses through the CDF table."""
        return self.cdf(b, max_depth) - self.cdf(a, max_depth)

    # -- serialization --------------------------------------------------------

    def geometry_json(self) -> str:
        dump = {
            "m": self.m,
            "C": self.params.C,
            "depth": self.depth,
            "start_gen": self.params.start_gen,
            "generations": {
                str(geo.generation): {
                    "offsets": list(geo.child_offsets),
                    "lengths": list(geo.child_lengths),
                    "masses": list(geo.child_masses),
                    "L": geo.L,
                }
                for geo in self.geometry.values()
            },
        }
        return json.dumps(dump, sort_keys=True, indent=2)


class LebesgueInterval:
    """Lebesgue measure restricted to [a, b]."""

    def __init__(self, a: float = 0.0, b: float = 1.0):
        if b < a:
            raise ReversedInterval(f"need a <= b, got [{a}, {b}]")
        self.a = a
        self.b = b
        self.total_mass = b - a

    def interval_mass(self, a: float, b: float) -> float:
        if b < a:
            raise ReversedInterval(f"need a <= b, got [{a}, {b}]")
        return max(0.0, min(b, self.b) - max(a, self.a))

    def ball_mass(self, x: float, r: float) -> float:
        if r < 0.0:
            raise NegativeRadius(f"radius {r} < 0")
        return self.interval_mass(x - r, x + r)

    def interval_mass_batch(self, a: np.ndarray, b: np.ndarray, max_depth=None) -> np.ndarray:
        lo = np.maximum(np.asarray(a, dtype=float), self.a)
        hi = np.minimum(np.asarray(b, dtype=float), self.b)
        return np.maximum(0.0, hi - lo)


class PointMasses:
    """Finite atomic measure, for spike-style inputs."""

    def __init__(self, points, weights):
        self.points = np.asarray(points, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        if self.points.shape != self.weights.shape:
            raise InvalidParams("points and weights must have equal length")
        order = np.argsort(self.points)
        self.points = self.points[order]
        self.weights = self.weights[order]
        self.total_mass = float(self.weights.sum())

    def interval_mass(self, a: float, b: float) -> float:
        if b < a:
            raise ReversedInterval(f"need a <= b, got [{a}, {b}]")
        sel = (self.points >= a) & (self.points <= b)
        return float(self.weights[sel].sum())

    def ball_mass(self, x: float, r: float) -> float:
        if r < 0.0:
            raise NegativeRadius(f"radius {r} < 0")
        return self.interval_mass(x - r, x + r)


# -- module-level operations ---------------------------------------------------


def build_cantor(params: CantorParams) -> CantorMeasure:
    """Construct the measure; fails on parameter or separation violations."""
    return CantorMeasure(params)


def template_measure(params: CantorParams) -> CantorMeasure:
    """Unit-mass template whose local generation-k split uses index start_gen + k."""
    return CantorMeasure(params)


def node_geometry(measure: CantorMeasure, generation: int) -> NodeGeometry:
    """Normalized geometry of the split that creates local generation `generation`."""
    return measure.split_geometry(generation)


@dataclass
class GrowthEstimate:
    max_ratio: float
    witness: tuple[float, float]
    n_intervals: int


def growth_constant(measure, m: float, n_samples: int, seed: int) -> GrowthEstimate:
    """Supremum estimate of mu(J) / len(J)**m over sampled intervals.

    The sample always contains the construction intervals (up to an
    enumeration cap) plus seeded random intervals, stratified in scale.
    Zero-length samples are skipped.
    """
    if n_samples < 1:
        raise InvalidParams("n_samples must be >= 1")
    rng = derive_rng(seed, "growth-constant")

    starts_list = []
    ends_list = []

    if isinstance(measure, CantorMeasure):
        enum_gen = min(measure.depth, 8)
        for g in range(0, enum_gen + 1):
            s, ln, _ = measure.leaf_table(g)
            starts_list.append(s)
            ends_list.append(s + ln)

    n_unif = n_samples // 2
    n_scale = n_samples - n_unif
    a = rng.uniform(-0.05, 1.05, size=n_unif)
    b = rng.uniform(-0.05, 1.05, size=n_unif)
    starts_list.append(np.minimum(a, b))
    ends_list.append(np.maximum(a, b))

    # Scale-stratified: log-uniform lengths so tiny intervals are exercised.
    log_len = rng.uniform(np.log(1e-12), np.log(1.0), size=n_scale)
    lengths = np.exp(log_len)
    centers = rng.uniform(0.0, 1.0, size=n_scale)
    starts_list.append(centers - lengths / 2)
    ends_list.append(centers + lengths / 2)

    starts = np.concatenate(starts_list)
    ends = np.concatenate(ends_list)
    lens = ends - starts
    keep = lens > 0.0
    starts, ends, lens = starts[keep], ends[keep], lens[keep]

    if isinstance(measure, CantorMeasure) and measure.depth > 10:
        # CDF tables are only exact at full depth; fall back to tree descent.
        masses = np.array([measure.interval_mass(s, e) for s, e in zip(starts, ends)])
    elif hasattr(measure, "interval_mass_batch"):
        masses = measure.interval_mass_batch(starts, ends)
    else:
        masses = np.array([measure.interval_mass(s, e) for s, e in zip(starts, ends)])

    ratios = masses / lens**m
    i = int(np.argmax(ratios))
    return GrowthEstimate(
        max_ratio=float(ratios[i]),
        witness=(float(starts[i]), float(ends[i])),
        n_intervals=int(len(ratios)),
    )
