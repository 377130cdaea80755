"""Locating the zeros of 1F1 inside a disk.

Counts come from the argument principle: the continuous argument of f is
tracked along a rectangle boundary, bisecting until neighbouring samples
differ by less than pi/4. A quadtree splits the disk-circumscribing square
until every leaf holds at most one zero, and Newton's method polishes each
isolated zero in extended precision.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpc

from .errors import BoundaryZeroError, ConvergenceError, DerivativeVanishes, NonIntegerWinding
from .kummer import Parameters, classify, derivative, evaluate
from .precision import DEFAULT_POLICY, BigComplex, PrecisionPolicy, as_mpc, working

log = logging.getLogger(__name__)

ARG_STEP = math.pi / 4
ROUNDING_GUARD = 0.25
MAX_PERTURBATIONS = 5
MAX_NEWTON_ITERATIONS = 100
NEWTON_TOL = 1e-25
RESIDUAL_TOL = 1e-15
MARGIN_FRACTION = 1e-3
MIN_BOX_FRACTION = 1e-6
# multiplicity boxes live in double-precision coordinates
MIN_LOCAL_RADIUS = 1e-9

# split points as fractions of the half-width; never the exact centre, which
# is where symmetric zero sets (e.g. on the imaginary axis) like to sit
_SPLIT_OFFSETS = (
    (0.0371, 0.0529),
    (-0.0613, 0.0847),
    (0.1093, -0.0419),
    (-0.1327, -0.1171),
    (0.1789, 0.1523),
    (-0.2011, 0.0233),
)
_SHIFTS = ((0.0, 0.0), (0.0123, 0.0071), (-0.0217, 0.0163), (0.0311, -0.0259), (-0.0409, -0.0347), (0.0503, 0.0437))


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle."""

    center: complex
    half_width: float
    half_height: float
    bounds: tuple[float, float, float, float] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not (self.half_width > 0 and self.half_height > 0):
            raise ValueError("region half sizes must be positive")
        object.__setattr__(self, "center", complex(self.center))

    @classmethod
    def square(cls, center: complex, half_width: float) -> "Region":
        return cls(center, half_width, half_width)

    @classmethod
    def from_bounds(cls, x0: float, x1: float, y0: float, y1: float) -> "Region":
        return cls(complex((x0 + x1) / 2, (y0 + y1) / 2), (x1 - x0) / 2, (y1 - y0) / 2, (x0, x1, y0, y1))

    @property
    def edges(self) -> tuple[float, float, float, float]:
        if self.bounds is not None:
            return self.bounds
        c = self.center
        return (c.real - self.half_width, c.real + self.half_width, c.imag - self.half_height, c.imag + self.half_height)

    @property
    def diameter(self) -> float:
        return 2.0 * math.hypot(self.half_width, self.half_height)

    def contains(self, z, slack: float = 0.0) -> bool:
        z = complex(z)
        x0, x1, y0, y1 = self.edges
        return x0 - slack <= z.real <= x1 + slack and y0 - slack <= z.imag <= y1 + slack

    def split(self, fx: float = 0.0, fy: float = 0.0) -> tuple["Region", ...]:
        x0, x1, y0, y1 = self.edges
        xs = self.center.real + fx * self.half_width
        ys = self.center.imag + fy * self.half_height
        return (
            Region.from_bounds(x0, xs, y0, ys),
            Region.from_bounds(xs, x1, y0, ys),
            Region.from_bounds(x0, xs, ys, y1),
            Region.from_bounds(xs, x1, ys, y1),
        )

    def shifted(self, dx: float, dy: float) -> "Region":
        return Region(self.center + complex(dx * self.half_width, dy * self.half_height), self.half_width, self.half_height)


@dataclass(frozen=True)
class Zero:
    location: BigComplex
    multiplicity: int
    residual: float
    index: int | None = None  # position in the modulus-ordered sequence; None until ordered

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be at least 1")

    def __complex__(self):
        return complex(self.location)


@dataclass(frozen=True)
class ZeroSet:
    params: Parameters
    r_max: float
    zeros: tuple[Zero, ...]
    certified_count: int

    def sequence(self) -> list:
        """z_1, z_2, ... as ``mpc`` with multiple zeros repeated."""
        out = []
        for zero in self.zeros:
            out.extend([zero.location.mpc] * zero.multiplicity)
        return out

    def moduli(self) -> list[float]:
        return [float(abs(z)) for z in self.sequence()]

    def counting(self, r: float) -> int:
        """n(r): zeros with |z| <= r, counted with multiplicity."""
        return sum(zero.multiplicity for zero in self.zeros if float(abs(zero.location)) <= r)

    def __len__(self):
        return len(self.zeros)


class _NearBoundary(Exception):
    pass


class _PhaseSampler:
    """Memoised arg f(x + iy); the cache only holds deterministic values."""

    def __init__(self, params: Parameters, policy: PrecisionPolicy):
        self.params = params
        self.policy = policy
        self._cache: dict[tuple[float, float], float | None] = {}

    def __call__(self, x: float, y: float) -> float:
        key = (x, y)
        try:
            phase = self._cache[key]
        except KeyError:
            result = evaluate(self.params, complex(x, y), self.policy)
            value = result.value.mpc
            if float(abs(value)) <= 8.0 * result.abs_error_estimate:
                phase = None
            else:
                phase = float(gmpy2.phase(value))
            self._cache[key] = phase
        if phase is None:
            raise _NearBoundary((x, y))
        return phase


def _wrap(d: float) -> float:
    d = math.fmod(d, 2 * math.pi)
    if d > math.pi:
        d -= 2 * math.pi
    elif d <= -math.pi:
        d += 2 * math.pi
    return d


def _grid_step(length: float) -> float:
    return min(1.0, 2.0 ** math.floor(math.log2(length / 8.0)))


def _grid(lo: float, hi: float) -> list[float]:
    step = _grid_step(hi - lo)
    first = math.floor(lo / step) + 1
    last = math.ceil(hi / step) - 1
    pad = 1e-9 * step
    inner = [k * step for k in range(first, last + 1) if lo + pad < k * step < hi - pad]
    return [lo, *inner, hi]


def _segment_change(sample, point, lo: float, hi: float, margin: float) -> float:
    """Continuous change of arg f along point(t), t from lo to hi."""
    ts = _grid(lo, hi)
    phases = [sample(*point(t)) for t in ts]
    total = 0.0
    for i in range(len(ts) - 1):
        stack = [(ts[i], ts[i + 1], phases[i], phases[i + 1])]
        while stack:
            a, b, pa, pb = stack.pop()
            d = _wrap(pb - pa)
            if abs(d) < ARG_STEP:
                total += d
                continue
            if b - a < margin:
                raise _NearBoundary(point(a))
            mid = 0.5 * (a + b)
            pm = sample(*point(mid))
            # right half first on the stack so the left half is summed first
            stack.append((mid, b, pm, pb))
            stack.append((a, mid, pa, pm))
    return total


def _raw_winding(sample, region: Region, margin: float) -> float:
    x0, x1, y0, y1 = region.edges
    bottom = _segment_change(sample, lambda t: (t, y0), x0, x1, margin)
    right = _segment_change(sample, lambda t: (x1, t), y0, y1, margin)
    top = _segment_change(sample, lambda t: (t, y1), x0, x1, margin)
    left = _segment_change(sample, lambda t: (x0, t), y0, y1, margin)
    return (bottom + right - top - left) / (2 * math.pi)


def _count(sample, region: Region) -> int:
    winding = _raw_winding(sample, region, MARGIN_FRACTION * region.diameter)
    count = round(winding)
    if abs(winding - count) > ROUNDING_GUARD or count < 0:
        raise NonIntegerWinding(f"winding number {winding:.6f} is not a nonnegative integer", region)
    return count


def _count_with_retries(sample, candidates: Iterable[Region]) -> tuple[Region, int]:
    last = None
    for region in candidates:
        try:
            return region, _count(sample, region)
        except _NearBoundary as exc:
            last = region
            log.debug("zero near boundary of %s at %s; perturbing", region, exc.args[0])
    raise BoundaryZeroError("a zero sits on the region boundary after all perturbations", last)


def _require_theorem_scope(params) -> Parameters:
    if not isinstance(params, Parameters):
        params = classify(*params)
    params.require_generic()
    return params


def winding_count(params, region: Region, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """Number of zeros (with multiplicity) inside ``region``.

    When a zero lies within the boundary margin the region is shifted
    slightly and retried, at most five times.
    """
    params = _require_theorem_scope(params)
    sample = _PhaseSampler(params, policy)
    candidates = (region.shifted(dx, dy) for dx, dy in _SHIFTS[: MAX_PERTURBATIONS + 1])
    return _count_with_retries(sample, candidates)[1]


def _split_counted(sample, region: Region, count: int) -> list[tuple[Region, int]]:
    """Split into four children whose counts add up to ``count``."""
    for fx, fy in _SPLIT_OFFSETS:
        children = region.split(fx, fy)
        try:
            counts = [_count(sample, child) for child in children]
        except _NearBoundary:
            continue
        if sum(counts) == count:
            return list(zip(children, counts))
        log.debug("child counts %s do not add up to %d in %s", counts, count, region)
    raise BoundaryZeroError("could not split region without crossing a zero", region)


# -- Newton -----------------------------------------------------------------


def _newton(params: Parameters, seed, tol: float, policy: PrecisionPolicy, multiplicity: int = 1, escape: float | None = None):
    """Returns the converged point as ``mpc`` or None when the iteration escapes/stalls."""
    seed_c = complex(seed)
    bits = policy.bits_for(abs(seed_c) + 1.0) + 64
    with working(bits):
        z = as_mpc(seed, bits)
    for _ in range(MAX_NEWTON_ITERATIONS):
        f = evaluate(params, z, policy)
        fv = f.value.mpc
        if float(abs(fv)) <= f.abs_error_estimate:
            return z
        fp = derivative(params, z, policy)
        fpv = fp.value.mpc
        if fpv == 0 or float(abs(fpv)) <= fp.abs_error_estimate:
            raise DerivativeVanishes(f"f' vanishes near {complex(z)}")
        bits = policy.bits_for(float(abs(z)) + 1.0) + 64
        with working(bits):
            step = multiplicity * mpc(fv) / mpc(fpv)
            z = mpc(z) - step
            size = max(1.0, float(abs(z)))
            if float(abs(step)) < tol * size:
                return z
        if escape is not None and abs(complex(z) - seed_c) > escape:
            return None
    return None


def _residual(params: Parameters, z, policy: PrecisionPolicy) -> tuple[float, float]:
    result = evaluate(params, z, policy)
    return float(abs(result.value.mpc)), result.max_term


def _escape_radius(seed: complex) -> float:
    return 2.0 * max(abs(seed), 8.0) + 8.0


def refine_newton(params, seed, tol: float = NEWTON_TOL, policy: PrecisionPolicy = DEFAULT_POLICY) -> Zero:
    """Polish ``seed`` to a zero of f; multiplicity from a local winding count."""
    params = _require_theorem_scope(params)
    seed = complex(seed)
    z = _newton(params, seed, tol, policy, escape=_escape_radius(seed))
    if z is None:
        raise ConvergenceError(f"Newton iteration from {seed} did not converge")
    residual, scale = _residual(params, z, policy)
    if residual > RESIDUAL_TOL * max(1.0, scale):
        raise ConvergenceError(f"Newton converged to {complex(z)} with residual {residual:g}")
    centre = complex(z)
    radius = max(10.0 * tol * max(1.0, abs(centre)), MIN_LOCAL_RADIUS * max(1.0, abs(centre)))
    sample = _PhaseSampler(params, policy)
    candidates = (Region.square(centre, radius * 2.0**k) for k in range(MAX_PERTURBATIONS + 1))
    multiplicity = _count_with_retries(sample, candidates)[1]
    if multiplicity == 0:
        raise ConvergenceError(f"no zero certified around {centre}")
    if multiplicity > 1:
        z = _newton(params, z, tol, policy, multiplicity=multiplicity) or z
        residual, _ = _residual(params, z, policy)
    return Zero(BigComplex.from_mpc(z), multiplicity, residual)


# -- quadtree ---------------------------------------------------------------


def _asymptotic_seeds(params: Parameters, radius: float) -> list[complex]:
    from .analytics import predicted_zero

    seeds = []
    n = 1
    while True:
        batch = []
        for branch in (1, -1):
            try:
                batch.append(complex(predicted_zero(params, n, branch)))
            except Exception:  # gamma poles etc.: seeds are optional
                continue
        seeds.extend(w for w in batch if abs(w) <= radius)
        if n > 2 and all(abs(w) > radius for w in batch):
            break
        n += 1
    return seeds


def _top_region(sample, r_max: float) -> tuple[Region, int]:
    candidates = (Region.square(0j, r_max * (1.0 + 0.003 * k)) for k in range(MAX_PERTURBATIONS + 1))
    return _count_with_retries(sample, candidates)


class _Finder:
    def __init__(self, params: Parameters, r_max: float, policy: PrecisionPolicy, tol: float, seeds: Sequence[complex]):
        self.params = params
        self.policy = policy
        self.tol = tol
        self.seeds = seeds
        self.min_box = MIN_BOX_FRACTION * r_max
        self.sample = _PhaseSampler(params, policy)

    def is_leaf(self, region: Region, count: int) -> bool:
        return count == 1 or 2.0 * max(region.half_width, region.half_height) < self.min_box

    def split(self, item: tuple[Region, int]) -> list[tuple[Region, int]]:
        return _split_counted(self.sample, *item)

    def resolve(self, item: tuple[Region, int]) -> Zero:
        region, count = item
        while True:
            if count > 1:
                return self._cluster(region, count)
            slack = 1e-9 * region.diameter
            seeds = [w for w in self.seeds if region.contains(w)] + [region.center]
            for seed in seeds:
                try:
                    z = _newton(self.params, seed, self.tol, self.policy, escape=2.0 * region.diameter)
                except DerivativeVanishes:
                    continue
                if z is not None and region.contains(z, slack):
                    residual, _ = _residual(self.params, z, self.policy)
                    return Zero(BigComplex.from_mpc(z), 1, residual)
            if 2.0 * max(region.half_width, region.half_height) < self.min_box:
                raise ConvergenceError("Newton failed from every seed in the leaf", region)
            region, count = next((child for child in self.split((region, 1)) if child[1] == 1))

    def _cluster(self, region: Region, count: int) -> Zero:
        z = _newton(self.params, region.center, self.tol, self.policy, multiplicity=count, escape=2.0 * region.diameter)
        if z is None:
            raise ConvergenceError("Newton failed on a zero cluster", region)
        residual, _ = _residual(self.params, z, self.policy)
        return Zero(BigComplex.from_mpc(z), count, residual)


def _order_key(zero: Zero):
    z = zero.location.mpc
    return (abs(z), gmpy2.phase(z))


def order_zeros(zeros: Iterable[Zero]) -> tuple[Zero, ...]:
    """Sort by modulus, ties (to 1e-20 relative) by argument in (-pi, pi]."""
    items = sorted(zeros, key=_order_key)
    groups: list[list[Zero]] = []
    for zero in items:
        modulus = abs(zero.location.mpc)
        if groups and abs(modulus - abs(groups[-1][0].location.mpc)) <= 1e-20 * max(1, modulus):
            groups[-1].append(zero)
        else:
            groups.append([zero])
    ordered = []
    index = 1
    for group in groups:
        for zero in sorted(group, key=lambda z: gmpy2.phase(z.location.mpc)):
            ordered.append(Zero(zero.location, zero.multiplicity, zero.residual, index))
            index += zero.multiplicity
    return tuple(ordered)


def find_zeros(
    params,
    r_max: float,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    *,
    workers: int = 1,
    use_asymptotic_seeds: bool = True,
    tol: float = NEWTON_TOL,
) -> ZeroSet:
    """All zeros of 1F1 with |z| <= r_max, ordered by modulus.

    Leaves of the quadtree are independent and may be processed by
    ``workers`` threads; the result does not depend on the thread count.
    """
    params = _require_theorem_scope(params)
    if not r_max >= 1:
        raise ValueError("r_max must be at least 1")
    seeds = _asymptotic_seeds(params, 1.5 * r_max) if use_asymptotic_seeds else []
    finder = _Finder(params, r_max, policy, tol, seeds)
    top, top_count = _top_region(finder.sample, r_max)
    log.info("top-level square half-width %.6g holds %d zeros", top.half_width, top_count)

    pending = [(top, top_count)] if top_count else []
    leaves: list[tuple[Region, int]] = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        while pending:
            to_split = []
            for item in pending:
                (leaves if finder.is_leaf(*item) else to_split).append(item)
            pending = [child for children in pool.map(finder.split, to_split) for child in children if child[1] > 0]
        found = list(pool.map(finder.resolve, leaves))

    inside = [zero for zero in found if abs(zero.location.mpc) <= r_max]
    discarded = sum(zero.multiplicity for zero in found) - sum(zero.multiplicity for zero in inside)
    certified = top_count - discarded
    ordered = order_zeros(inside)
    if sum(zero.multiplicity for zero in ordered) != certified:
        raise NonIntegerWinding("refined zeros do not account for the certified count", top)
    return ZeroSet(params, float(r_max), ordered, certified)
