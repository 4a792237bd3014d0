"""Random shifted dyadic grids, good/bad cubes, stopping times, martingales.

One-dimensional specialization: cubes are half-open intervals
[k 2^-i + sigma_i, (k+1) 2^-i + sigma_i) where the scale-i shift is
sigma_i = sum_{j > i} 2^-j w_j with independent random bits w_j.  All
positions are integers in units of 2^-i_max, so containment and boundary
distances are exact.

A cube Q is bad if some cube at scale >= 2^r times larger has boundary
within len(Q)^gamma len(Qtilde)^(1-gamma) of Q, with gamma = a/(2m+2a);
goodness depends only on the shift bits at scales coarser than Q, which a
test exercises directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    AccretivityViolated,
    CutoffBelowR,
    DivisionByNearZeroAverage,
    InvalidParams,
)
from .rng import derive_rng

__all__ = [
    "Cube",
    "ShiftedGrid",
    "GoodnessParams",
    "GoodnessResult",
    "make_grid",
    "classify_good",
    "estimate_pi_good",
    "PiGoodEstimate",
    "StoppingForest",
    "build_stopping",
    "carleson_packing",
    "MartingaleCoeffs",
    "martingale_decompose",
]


@dataclass(frozen=True, order=True)
class Cube:
    """Scale index i (side 2^-i) and position index k."""

    i: int
    k: int


@dataclass(frozen=True)
class ShiftedGrid:
    """Dyadic grid with one shift bit per scale in [i_min+1, i_max]."""

    i_min: int
    i_max: int
    bits: tuple[int, ...]  # bits[j] is w_{i_min+1+j} in {0, 1}

    def __post_init__(self):
        if self.i_max <= self.i_min:
            raise InvalidParams("need i_max > i_min")
        if len(self.bits) != self.i_max - self.i_min:
            raise InvalidParams("one shift bit per scale in (i_min, i_max]")

    def bit(self, j: int) -> int:
        """Shift bit w_j for scale j (0 outside the tracked range)."""
        if self.i_min < j <= self.i_max:
            return self.bits[j - self.i_min - 1]
        return 0

    def shift_units(self, i: int) -> int:
        """sigma_i in units of 2^-i_max: sum over j > i of w_j 2^(i_max - j)."""
        return sum(self.bit(j) << (self.i_max - j) for j in range(i + 1, self.i_max + 1))

    def cube_units(self, cube: Cube) -> tuple[int, int]:
        """(start, length) of the cube in units of 2^-i_max; exact integers."""
        if not (self.i_min <= cube.i <= self.i_max):
            raise InvalidParams(f"scale {cube.i} outside [{self.i_min}, {self.i_max}]")
        length = 1 << (self.i_max - cube.i)
        return cube.k * length + self.shift_units(cube.i), length

    def cube_interval(self, cube: Cube) -> tuple[float, float]:
        start, length = self.cube_units(cube)
        unit = 0.5**self.i_max
        return start * unit, (start + length) * unit

    def containing_cube(self, x: float, i: int) -> Cube:
        unit = 0.5**self.i_max
        u = x / unit - self.shift_units(i)
        return Cube(i, int(math.floor(u / (1 << (self.i_max - i)))))

    def children(self, cube: Cube) -> tuple[Cube, Cube]:
        if cube.i >= self.i_max:
            raise InvalidParams("no children below the finest scale")
        s_par, _ = self.cube_units(cube)
        s0 = self.shift_units(cube.i + 1)
        half = 1 << (self.i_max - cube.i - 1)
        k0 = (s_par - s0) // half
        return Cube(cube.i + 1, k0), Cube(cube.i + 1, k0 + 1)

    def parent(self, cube: Cube) -> Cube:
        if cube.i <= self.i_min:
            raise InvalidParams("no parent above the coarsest scale")
        s, _ = self.cube_units(cube)
        sp = self.shift_units(cube.i - 1)
        return Cube(cube.i - 1, (s - sp) >> (self.i_max - cube.i + 1))

    def contains(self, outer: Cube, inner: Cube) -> bool:
        so, lo = self.cube_units(outer)
        si, li = self.cube_units(inner)
        return so <= si and si + li <= so + lo


def make_grid(seed: int, scale_range: tuple[int, int]) -> ShiftedGrid:
    """Seeded grid; shift bits are independent uniform bits, one per scale."""
    i_min, i_max = scale_range
    rng = derive_rng(seed, "shifted-grid")
    bits = tuple(int(b) for b in rng.integers(0, 2, size=i_max - i_min))
    return ShiftedGrid(i_min=i_min, i_max=i_max, bits=bits)


@dataclass(frozen=True)
class GoodnessParams:
    gamma: float
    r: int

    @staticmethod
    def from_exponents(m: float, alpha: float, ensure_positive: bool = False) -> "GoodnessParams":
        """gamma = alpha/(2m+2alpha); r the smallest integer with
        2^(r(1-gamma)) >= 3.

        That minimal r can make every cube bad (the distance threshold at
        scale gap r exceeds the largest achievable lattice distance), so
        ensure_positive grows r until the union bound over scale gaps
        sum 2(2^(-gamma*up) + 2^(-up)) drops below 1/2, which guarantees
        P(good) >= 1/2.
        """
        if m <= 0 or alpha <= 0:
            raise InvalidParams("need m > 0 and alpha > 0")
        gamma = alpha / (2.0 * m + 2.0 * alpha)
        r = 1
        while 2.0 ** (r * (1.0 - gamma)) < 3.0:
            r += 1
        if ensure_positive:
            def bad_bound(r0: int) -> float:
                return 2.0 * (
                    2.0 ** (-gamma * r0) / (1.0 - 2.0**-gamma)
                    + 2.0 ** (-r0) / 0.5
                )

            while bad_bound(r) > 0.5:
                r += 1
        return GoodnessParams(gamma=gamma, r=r)

    def validate(self) -> None:
        if not (0.0 < self.gamma < 0.5):
            raise InvalidParams(f"gamma must be in (0, 1/2), got {self.gamma}")
        if 2.0 ** (self.r * (1.0 - self.gamma)) < 3.0:
            raise InvalidParams("r too small: need 2^(r(1-gamma)) >= 3")


@dataclass(frozen=True)
class GoodnessResult:
    status: str  # "good" or "bad"
    checked_scales: int
    hit_scale: Optional[int]
    beyond_cutoff_unknown: bool  # "good" is an over-approximation past the cutoff


def classify_good(grid: ShiftedGrid, cube: Cube, params: GoodnessParams,
                  scale_cutoff: int) -> GoodnessResult:
    """Bad if a >= 2^r-times-larger cube's boundary is closer than
    len(Q)^gamma len(Qtilde)^(1-gamma); checked K levels up, flagged as an
    over-approximation of goodness beyond the cutoff."""
    params.validate()
    if scale_cutoff < params.r:
        raise CutoffBelowR(f"cutoff {scale_cutoff} below r={params.r}")
    start, length = grid.cube_units(cube)
    unit = 0.5**grid.i_max
    ell = length * unit
    checked = 0
    for up in range(params.r, scale_cutoff + 1):
        i_t = cube.i - up
        if i_t < grid.i_min:
            break
        checked += 1
        big = 1 << (grid.i_max - i_t)
        sigma = grid.shift_units(i_t)
        # Distance from [start, start+length] to the lattice {k big + sigma}.
        pos = (start - sigma) % big
        if pos + length >= big or pos == 0:
            d_units = 0
        else:
            d_units = min(pos, big - pos - length)
        threshold = ell**params.gamma * (big * unit) ** (1.0 - params.gamma)
        if d_units * unit <= threshold:
            return GoodnessResult("bad", checked, i_t, False)
    return GoodnessResult("good", checked, None, True)


@dataclass
class PiGoodEstimate:
    estimates: list[float]
    pooled_se: float
    trials: int

    @property
    def spread_in_se(self) -> float:
        if self.pooled_se == 0.0:
            return 0.0
        return (max(self.estimates) - min(self.estimates)) / self.pooled_se


def estimate_pi_good(m: float, alpha: float, trials: int, seed: int, cutoff: int,
                     base_positions: tuple[int, ...] = (0, 5)) -> PiGoodEstimate:
    """Monte Carlo estimate of P(Q + w is good), for several base cubes.

    The probability is independent of the base cube; the result carries the
    per-cube estimates and the pooled standard error so callers can check
    the independence directly.
    """
    if trials < 100:
        raise InvalidParams("need at least 100 trials")
    params = GoodnessParams.from_exponents(m, alpha, ensure_positive=True)
    if cutoff < params.r:
        cutoff = params.r + 4
    rng = derive_rng(seed, "pi-good")
    counts = [0] * len(base_positions)
    i_q = cutoff  # cube scale; scales 0..cutoff are tracked above it
    for _ in range(trials):
        bits = tuple(int(b) for b in rng.integers(0, 2, size=i_q))
        grid = ShiftedGrid(i_min=0, i_max=i_q, bits=bits)
        for b, k in enumerate(base_positions):
            res = classify_good(grid, Cube(i_q, k), params, cutoff)
            if res.status == "good":
                counts[b] += 1
    estimates = [c / trials for c in counts]
    p_bar = sum(estimates) / len(estimates)
    pooled_se = math.sqrt(max(p_bar * (1 - p_bar), 1e-12) / trials)
    return PiGoodEstimate(estimates=estimates, pooled_se=pooled_se, trials=trials)


# -- stopping times ---------------------------------------------------------------


@dataclass
class StoppingForest:
    """Layers D^0 = {root}, D^1, D^2, ... of stopping cubes with parent links."""

    grid: ShiftedGrid
    root: Cube
    threshold: float
    layers: list[list[Cube]]
    stop_parent: dict[Cube, Cube]  # stopping cube -> stopping cube that spawned it
    packing_fraction: dict[Cube, float]  # spawning cube -> mu(next layer)/mu(cube)
    b_family: Callable[[Cube], np.ndarray] = field(repr=False, default=None)
    _stopping: Optional[set[Cube]] = field(default=None, repr=False)

    def all_stopping(self) -> set[Cube]:
        if self._stopping is None:
            self._stopping = {q for layer in self.layers for q in layer}
        return self._stopping

    def max_packing_fraction(self) -> float:
        return max(self.packing_fraction.values(), default=0.0)

    def smallest_ancestor(self, cube: Cube) -> Cube:
        """The smallest stopping cube containing `cube` (itself if stopping)."""
        stopping = self.all_stopping()
        q = cube
        while q not in stopping:
            if q.i <= self.root.i:
                raise InvalidParams(f"{cube} is not inside the stopping root")
            q = self.grid.parent(q)
        return q


def _leaf_slice(grid: ShiftedGrid, root: Cube, cube: Cube) -> slice:
    """Index range of cube's finest-scale leaves inside root's leaf vector."""
    s_root, _ = grid.cube_units(root)
    s, ln = grid.cube_units(cube)
    return slice(s - s_root, s - s_root + ln)


def _leaf_masses(measure, grid: ShiftedGrid, root: Cube) -> np.ndarray:
    s_root, ln = grid.cube_units(root)
    unit = 0.5**grid.i_max
    edges = (s_root + np.arange(ln + 1)) * unit
    return np.array(
        [measure.interval_mass(edges[i], edges[i + 1]) for i in range(ln)]
    )


def build_stopping(measure, b_family: Callable[[Cube], np.ndarray], root: Cube,
                   c: float, max_depth: int, grid: ShiftedGrid) -> StoppingForest:
    """Layered maximal-cube search: children of a stopping cube S are the
    maximal Q inside S with |avg of b_S over Q| < c.

    b_family maps a stopping cube to its function as a vector over the
    finest-scale leaves of the root cube.  Zero-mass cubes are skipped (they
    carry no averages and no mass).
    """
    if c <= 0:
        raise InvalidParams("threshold c must be positive")
    masses = _leaf_masses(measure, grid, root)
    root_mass = float(masses.sum())
    if root_mass <= 0:
        raise InvalidParams("root cube carries no mass")

    def avg(b_vec: np.ndarray, cube: Cube) -> Optional[float]:
        sl = _leaf_slice(grid, root, cube)
        mass = float(masses[sl].sum())
        if mass <= 0.0:
            return None
        return float(np.sum(b_vec[sl] * masses[sl])) / mass

    def cube_mass(cube: Cube) -> float:
        sl = _leaf_slice(grid, root, cube)
        return float(masses[sl].sum())

    b_root = b_family(root)
    a0 = avg(b_root, root)
    if a0 is None or abs(a0) < c:
        raise AccretivityViolated(
            f"|<b>| = {0.0 if a0 is None else abs(a0):.4f} < c = {c} at the root"
        )

    layers = [[root]]
    stop_parent: dict[Cube, Cube] = {}
    packing: dict[Cube, float] = {}
    current = [root]
    for _ in range(max_depth):
        nxt: list[Cube] = []
        for S in current:
            b_vec = b_family(S)
            found: list[Cube] = []

            def descend(q: Cube) -> None:
                if q.i >= grid.i_max:
                    return
                for ch in grid.children(q):
                    a = avg(b_vec, ch)
                    if a is None:
                        continue
                    if abs(a) < c:
                        found.append(ch)  # maximal: do not descend further
                    else:
                        descend(ch)

            descend(S)
            for q in found:
                stop_parent[q] = S
            packing[S] = sum(cube_mass(q) for q in found) / cube_mass(S)
            nxt.extend(found)
        if not nxt:
            break
        layers.append(nxt)
        current = nxt
    return StoppingForest(
        grid=grid, root=root, threshold=c, layers=layers,
        stop_parent=stop_parent, packing_fraction=packing, b_family=b_family,
    )


def carleson_packing(forest: StoppingForest, measure, R: Cube) -> float:
    """sum of mu(S) over stopping S inside R, divided by mu(R)."""
    grid = forest.grid
    masses = _leaf_masses(measure, grid, forest.root)

    def cube_mass(cube: Cube) -> float:
        sl = _leaf_slice(grid, forest.root, cube)
        return float(masses[sl].sum())

    mR = cube_mass(R) if grid.contains(forest.root, R) else measure.interval_mass(
        *grid.cube_interval(R)
    )
    if mR <= 0:
        return 0.0
    total = 0.0
    for layer in forest.layers:
        for S in layer:
            if grid.contains(R, S):
                total += cube_mass(S)
    return total / mR


@dataclass
class MartingaleCoeffs:
    """Per-cube difference functions as leaf vectors over the root cube."""

    root: Cube
    deltas: dict[Cube, np.ndarray]
    leaf_masses: np.ndarray

    def reconstruction(self) -> np.ndarray:
        out = np.zeros_like(self.leaf_masses)
        for v in self.deltas.values():
            out = out + v
        return out

    def integral(self, cube: Cube) -> float:
        return float(np.sum(self.deltas[cube] * self.leaf_masses))

    def energy(self) -> float:
        return float(
            sum(np.sum(v**2 * self.leaf_masses) for v in self.deltas.values())
        )


def martingale_decompose(measure, forest: StoppingForest, f: np.ndarray,
                         depth: int, near_zero: float = 1e-9) -> MartingaleCoeffs:
    """b-adapted martingale differences over the stopping forest.

    Delta_Q f = sum over children Q' of
        [ <f>_Q' / <b_{(Q')^a}>_Q' * b_{(Q')^a} - <f>_Q / <b_{Q^a}>_Q * b_{Q^a} ] 1_Q',
    with the root carrying its own expectation term on top; Q^a is the
    smallest stopping cube containing Q.  Summing Delta_Q f over all cubes
    down to `depth` reconstructs f exactly at leaf resolution, and every
    non-root difference has zero mean.
    """
    grid = forest.grid
    root = forest.root
    masses = _leaf_masses(measure, grid, root)
    stopping = forest.all_stopping()
    b_family = forest.b_family

    f = np.asarray(f, dtype=float)
    _, root_len = grid.cube_units(root)
    if f.shape != (root_len,):
        raise InvalidParams(f"f must have one value per finest-scale leaf ({root_len})")
    if depth > grid.i_max - root.i:
        raise InvalidParams("depth exceeds the grid's finest scale")

    def avg(vec: np.ndarray, cube: Cube) -> float:
        sl = _leaf_slice(grid, root, cube)
        mass = float(masses[sl].sum())
        if mass <= 0.0:
            return 0.0
        return float(np.sum(vec[sl] * masses[sl])) / mass

    norm_cache: dict[Cube, np.ndarray] = {}

    def projection(cube: Cube, anc: Cube) -> np.ndarray:
        """<f>_Q / <b_{Q^a}>_Q * b_{Q^a} restricted to Q (zero off Q)."""
        if cube not in norm_cache:
            sl = _leaf_slice(grid, root, cube)
            out = np.zeros_like(f)
            if float(masses[sl].sum()) > 0.0:
                b_vec = b_family(anc)
                bavg = avg(b_vec, cube)
                if abs(bavg) < near_zero:
                    raise DivisionByNearZeroAverage(
                        f"<b_anc> = {bavg:.2e} on {cube}; stopping construction broken"
                    )
                out[sl] = (avg(f, cube) / bavg) * b_vec[sl]
            norm_cache[cube] = out
        return norm_cache[cube]

    deltas: dict[Cube, np.ndarray] = {}

    def rec(cube: Cube, anc: Cube) -> None:
        if cube in stopping:
            anc = cube
        if cube.i - root.i >= depth:
            return
        own = projection(cube, anc)
        delta = -own
        for ch in grid.children(cube):
            ch_anc = ch if ch in stopping else anc
            delta = delta + projection(ch, ch_anc)
            rec(ch, anc)
        deltas[cube] = delta

    rec(root, root)
    # Top convention: the root keeps its own expectation term.
    deltas[root] = deltas[root] + projection(root, root)
    return MartingaleCoeffs(root=root, deltas=deltas, leaf_masses=masses)
