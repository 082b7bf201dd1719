"""Ambient metric spaces, balls, Schmidt nesting and the diffuseness machinery.

Points on the real line, Cantor sets and the boundary window of the
half-plane are exact ``Fraction`` values.  Tree-boundary points are digit
strings of a fixed depth.  Product spaces (used by the product game) carry
tuples of factor points and the max metric.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational, Real
from typing import Any, Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

KINDS = ("real-window", "cantor", "hyperbolic-boundary", "tree-boundary")

# thin-triangle constant of the hyperbolic plane
HALF_PLANE_DELTA = math.log(1 + math.sqrt(2))


class SpaceError(TypeError):
    """Points or balls from incompatible spaces were combined."""


class CounterexampleError(RuntimeError):
    """A set declared diffuse produced no witness."""


def as_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


@dataclass(frozen=True)
class SpaceDescriptor:
    kind: str
    lo: Fraction = Fraction(0)
    hi: Fraction = Fraction(1)
    nu: Fraction = Fraction(1, 3)
    depth: int = 8
    branching: int = 2
    delta: float = 0.0
    visual_C: float = 1.0
    visual_a: float = math.e
    factors: tuple = ()

    def __post_init__(self):
        if self.kind == "product":
            if len(self.factors) != 2:
                raise ValueError("product space needs exactly two factors")
            return
        if self.kind not in KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}")
        if not self.lo < self.hi:
            raise ValueError("window needs lo < hi")
        if self.kind == "cantor" and not (0 < self.nu <= Fraction(1, 2)):
            raise ValueError("Cantor contraction must lie in (0, 1/2]")
        if self.kind == "tree-boundary" and self.branching < 2:
            raise ValueError("tree branching must be at least 2")
        if self.depth < 1:
            raise ValueError("depth must be positive")
        # trees use the exact metric a^-(x|y), so only the hyperbolic boundary needs C > 1
        if self.visual_C < 1 or (self.kind == "hyperbolic-boundary" and self.visual_C <= 1):
            raise ValueError("visual_C must exceed 1")
        if self.visual_a <= 1:
            raise ValueError("visual_a must exceed 1")

    @property
    def is_tree(self) -> bool:
        return self.kind == "tree-boundary"

    @property
    def is_real(self) -> bool:
        return self.kind in ("real-window", "cantor", "hyperbolic-boundary")

    @property
    def exact(self) -> bool:
        if self.is_tree:
            return float(self.visual_a).is_integer()
        return self.kind != "product" or all(f.exact for f in self.factors)

    def contains(self, p) -> bool:
        """Whether ``p`` is a point of the ambient space (not of a playfield)."""
        if self.kind == "product":
            return (isinstance(p, tuple) and len(p) == 2
                    and all(f.contains(c) for f, c in zip(self.factors, p)))
        if self.is_tree:
            return (isinstance(p, str) and len(p) == self.depth
                    and not p.strip("0123456789"[: self.branching]))
        return isinstance(p, Real) and not isinstance(p, bool)


def real_window(lo=0, hi=1, **kw) -> SpaceDescriptor:
    return SpaceDescriptor("real-window", as_fraction(lo), as_fraction(hi), **kw)


def cantor_space(nu=Fraction(1, 3), depth=10, **kw) -> SpaceDescriptor:
    return SpaceDescriptor("cantor", nu=as_fraction(nu), depth=depth, **kw)


def hyperbolic_boundary(lo=0, hi=1, **kw) -> SpaceDescriptor:
    kw.setdefault("delta", HALF_PLANE_DELTA)
    # Euclidean vs visual metric from i on [0,1]: |x-y| = e^-(x|y) sqrt((1+x^2)(1+y^2))
    kw.setdefault("visual_C", 2.0)
    return SpaceDescriptor("hyperbolic-boundary", as_fraction(lo), as_fraction(hi), **kw)


def tree_boundary(branching=2, depth=8, visual_a=math.e, **kw) -> SpaceDescriptor:
    kw.setdefault("visual_C", 1.0)
    return SpaceDescriptor("tree-boundary", branching=branching, depth=depth,
                           visual_a=visual_a, **kw)


def product_space(a: SpaceDescriptor, b: SpaceDescriptor | None = None) -> SpaceDescriptor:
    return SpaceDescriptor("product", factors=(a, b if b is not None else a))


REAL_LINE = real_window(-(10 ** 9), 10 ** 9)


def tree_power(space: SpaceDescriptor, k) -> Fraction | float:
    """a^-k, exact when a is an integer and k an integer."""
    a = space.visual_a
    if float(a).is_integer() and float(k).is_integer():
        return Fraction(1, int(a) ** int(k)) if k >= 0 else Fraction(int(a) ** int(-k))
    return float(a) ** (-float(k))


def common_prefix(p: str, q: str) -> int:
    if p == q:
        return len(p)
    n = 0
    for a, b in zip(p, q):
        if a != b:
            break
        n += 1
    return n


def _check_point(space: SpaceDescriptor, p) -> None:
    if not space.contains(p):
        raise SpaceError(f"{p!r} is not a point of a {space.kind} space")


def distance(space: SpaceDescriptor, p, q):
    """Visual-metric distance between two points of ``space``."""
    _check_point(space, p)
    _check_point(space, q)
    if space.kind == "product":
        return max(distance(f, a, b) for f, a, b in zip(space.factors, p, q))
    if space.is_tree:
        if p == q:
            return Fraction(0) if space.exact else 0.0
        return tree_power(space, common_prefix(p, q))
    return abs(p - q)


@dataclass(frozen=True)
class Ball:
    center: Any
    radius: Any
    space: Optional[SpaceDescriptor] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        if self.space is not None:
            _check_point(self.space, self.center)

    @property
    def ambient(self) -> SpaceDescriptor:
        return self.space if self.space is not None else REAL_LINE

    def contains(self, p) -> bool:
        return distance(self.ambient, self.center, p) <= self.radius

    def scaled(self, factor) -> "Ball":
        return Ball(self.center, self.radius * factor, self.space)


def _common_space(a: Ball, b: Ball) -> SpaceDescriptor:
    if a.space is not None and b.space is not None and a.space != b.space:
        raise SpaceError("balls live in different spaces")
    return a.space or b.space or REAL_LINE


def is_schmidt_nested(inner: Ball, outer: Ball) -> bool:
    """Schmidt's order: radius(inner) + d(centers) <= radius(outer)."""
    space = _common_space(inner, outer)
    return inner.radius + distance(space, outer.center, inner.center) <= outer.radius


def balls_disjoint(a: Ball, b: Ball) -> bool:
    """Certified disjointness of two closed balls: d(centers) > r_a + r_b."""
    space = _common_space(a, b)
    return distance(space, a.center, b.center) > a.radius + b.radius


def diffuse_bound_from_perfectness(nu) -> Fraction | float:
    """Largest diffuseness parameter allowed for a nu-uniformly-perfect set."""
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    return min(1 - nu, nu * nu / 4)


# --------------------------------------------------------------------------
# playfields: closed subsets E on which centers must lie


class Playfield:
    """A closed subset of a space, searchable at a declared resolution."""

    space: SpaceDescriptor

    def __contains__(self, p) -> bool:
        raise NotImplementedError

    def sample_points(self) -> list:
        raise NotImplementedError

    def points_in(self, center, radius) -> list:
        """All resolution points within the closed ball."""
        raise NotImplementedError

    def preference_order(self, x, rho) -> Iterator:
        """Candidates sorted by |d(x, p) - rho/2|, ties to the larger point."""
        pts = self.points_in(x, rho)
        half = rho / 2
        key = lambda p: (abs(distance(self.space, x, p) - half), _neg_order(p))
        return iter(sorted(pts, key=key))

    def farthest_within(self, x, radius):
        """A point of E maximizing d(x, p) subject to d(x, p) <= radius."""
        best = None
        for p in self.points_in(x, radius):
            d = distance(self.space, x, p)
            if best is None or d > best[0]:
                best = (d, p)
        return None if best is None else best[1]

    def escapes(self, x, radius) -> bool:
        """Whether E is not contained in B(x, radius)."""
        raise NotImplementedError


class _Neg:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v > other.v

    def __eq__(self, other):
        return self.v == other.v


def _neg_order(p):
    if isinstance(p, Real):
        return -p
    return _Neg(p)


class SortedPointSet(Playfield):
    """Finitely many exact points on the line (Cantor endpoints, singletons)."""

    def __init__(self, points: Iterable, space: SpaceDescriptor, member: Callable | None = None):
        self.points = sorted(set(as_fraction(p) for p in points))
        self._floats = np.array([float(p) for p in self.points])
        self.space = space
        self._member = member

    def __contains__(self, p) -> bool:
        if self._member is not None:
            return self._member(p)
        i = bisect.bisect_left(self.points, p)
        return i < len(self.points) and self.points[i] == p

    def sample_points(self) -> list:
        return list(self.points)

    def points_in(self, center, radius) -> list:
        lo = bisect.bisect_left(self.points, center - radius)
        hi = bisect.bisect_right(self.points, center + radius)
        return self.points[lo:hi]

    def escapes(self, x, radius) -> bool:
        return x - self.points[0] > radius or self.points[-1] - x > radius

    def farthest_within(self, x, radius):
        lo = bisect.bisect_left(self.points, x - radius)
        hi = bisect.bisect_right(self.points, x + radius) - 1
        if lo > hi:
            return None
        a, b = self.points[lo], self.points[hi]
        return a if x - a > b - x else b

    def _outward(self, target, lo_limit, hi_limit):
        """Points in [lo_limit, hi_limit] ordered by distance from target."""
        pts = self.points
        i = bisect.bisect_left(pts, target)
        j = i - 1
        while True:
            right = pts[i] if i < len(pts) and pts[i] <= hi_limit else None
            left = pts[j] if j >= 0 and pts[j] >= lo_limit else None
            if right is None and left is None:
                return
            if left is None or (right is not None and right - target <= target - left):
                yield abs(right - target), -right, right
                i += 1
            else:
                yield abs(left - target), -left, left
                j -= 1

    def preference_order(self, x, rho) -> Iterator:
        half = rho / 2
        streams = [self._outward(x + half, x, x + rho), self._outward(x - half, x - rho, x)]
        seen = set()
        for _, _, p in heapq.merge(*streams):
            if p not in seen:
                seen.add(p)
                yield p


class IntervalPlayfield(Playfield):
    """A closed window [lo, hi] searched on a grid of the given resolution."""

    def __init__(self, space: SpaceDescriptor, resolution=Fraction(1, 1000)):
        self.space = space
        self.lo, self.hi = space.lo, space.hi
        self.h = as_fraction(resolution)

    def __contains__(self, p) -> bool:
        return isinstance(p, Real) and self.lo <= p <= self.hi

    def sample_points(self) -> list:
        n = int((self.hi - self.lo) / self.h)
        return [self.lo + k * self.h for k in range(n + 1)]

    def points_in(self, center, radius) -> list:
        a = max(self.lo, center - radius)
        b = min(self.hi, center + radius)
        if a > b:
            return []
        k0 = math.ceil((a - self.lo) / self.h)
        k1 = math.floor((b - self.lo) / self.h)
        pts = [self.lo + k * self.h for k in range(k0, k1 + 1)]
        return sorted(set(pts + [a, b]))

    def escapes(self, x, radius) -> bool:
        return x - self.lo > radius or self.hi - x > radius

    def farthest_within(self, x, radius):
        a = max(self.lo, x - radius)
        b = min(self.hi, x + radius)
        return a if x - a > b - x else b

    def preference_order(self, x, rho) -> Iterator:
        half = rho / 2
        exact = [p for p in (x + half, x - half) if p in self]
        yield from exact
        rest = [p for p in self.points_in(x, rho) if p not in exact]
        rest.sort(key=lambda p: (abs(abs(p - x) - half), -p))
        yield from rest


def cantor_points(nu=Fraction(1, 3), depth=10, lo=Fraction(0), hi=Fraction(1)) -> list[Fraction]:
    """Both endpoints of every depth-``depth`` cylinder of the two-map Cantor set."""
    nu = as_fraction(nu)
    width = hi - lo
    left = [Fraction(0)]
    for _ in range(depth):
        left = [nu * p for p in left] + [nu * p + (1 - nu) for p in left]
    size = nu ** depth
    pts = set()
    for p in left:
        pts.add(lo + width * p)
        pts.add(lo + width * (p + size))
    return sorted(pts)


def cantor_cylinders(nu=Fraction(1, 3), depth=10) -> list[tuple[Fraction, Fraction]]:
    nu = as_fraction(nu)
    left = [Fraction(0)]
    for _ in range(depth):
        left = [nu * p for p in left] + [nu * p + (1 - nu) for p in left]
    size = nu ** depth
    return sorted((p, p + size) for p in left)


def cantor_member(nu=Fraction(1, 3), depth=10) -> Callable[[Any], bool]:
    """Membership in the depth-``depth`` cylinder approximation."""
    nu = as_fraction(nu)

    def member(x) -> bool:
        x = as_fraction(x)
        for _ in range(depth):
            if x < 0 or x > 1:
                return False
            if x <= nu:
                x = x / nu
            elif x >= 1 - nu:
                x = (x - (1 - nu)) / nu
            else:
                return False
        return 0 <= x <= 1

    return member


class CantorPlayfield(SortedPointSet):
    def __init__(self, space: SpaceDescriptor):
        super().__init__(cantor_points(space.nu, space.depth, space.lo, space.hi), space,
                         member=cantor_member(space.nu, space.depth))

    def cylinder_left_endpoints(self) -> list[Fraction]:
        return [a for a, _ in cantor_cylinders(self.space.nu, self.space.depth)]


class TreePlayfield(Playfield):
    """The full boundary of a b-ary tree, truncated at a finite depth."""

    def __init__(self, space: SpaceDescriptor):
        self.space = space

    def __contains__(self, p) -> bool:
        return self.space.contains(p)

    def sample_points(self) -> list[str]:
        digits = "".join(str(k) for k in range(self.space.branching))
        return ["".join(w) for w in itertools.product(digits, repeat=self.space.depth)]

    def points_in(self, center, radius) -> list[str]:
        # B(x, r) = points sharing a prefix of length ceil(-log_a r)
        k = tree_overlap_needed(self.space, radius)
        if k > self.space.depth:
            return [center]
        k = max(k, 0)
        digits = "".join(str(j) for j in range(self.space.branching))
        stem = center[:k]
        return [stem + "".join(w) for w in itertools.product(digits, repeat=self.space.depth - k)]

    def escapes(self, x, radius) -> bool:
        return tree_power(self.space, 0) > radius

    def farthest_within(self, x, radius):
        pts = self.points_in(x, radius)
        return min(pts, key=lambda p: (common_prefix(p, x), p)) if pts else None


def tree_overlap_needed(space: SpaceDescriptor, radius) -> int:
    """Smallest integer k with a^-k <= radius."""
    k = math.ceil(-math.log(float(radius)) / math.log(float(space.visual_a)) - 1e-12)
    while k > 0 and tree_power(space, k - 1) <= radius:
        k -= 1
    while tree_power(space, k) > radius:
        k += 1
    return k


class ProductPlayfield(Playfield):
    def __init__(self, a: Playfield, b: Playfield | None = None):
        self.factors = (a, b if b is not None else a)
        self.space = product_space(self.factors[0].space, self.factors[1].space)

    def __contains__(self, p) -> bool:
        return isinstance(p, tuple) and all(c in f for f, c in zip(self.factors, p))

    def sample_points(self) -> list:
        return list(itertools.product(*(f.sample_points() for f in self.factors)))

    def points_in(self, center, radius) -> list:
        return list(itertools.product(*(f.points_in(c, radius) for f, c in zip(self.factors, center))))

    def escapes(self, x, radius) -> bool:
        return any(f.escapes(c, radius) for f, c in zip(self.factors, x))


def playfield_for(space: SpaceDescriptor, resolution=Fraction(1, 1000)) -> Playfield:
    if space.kind == "cantor":
        return CantorPlayfield(space)
    if space.kind == "tree-boundary":
        return TreePlayfield(space)
    if space.kind == "product":
        return ProductPlayfield(playfield_for(space.factors[0], resolution),
                                playfield_for(space.factors[1], resolution))
    return IntervalPlayfield(space, resolution)


# --------------------------------------------------------------------------
# diffuseness and uniform perfectness


def witness_is_valid(space: SpaceDescriptor, x, rho, y, beta, candidate, obstacle_radius=None) -> bool:
    """B(candidate, beta*rho) inside B(x, rho) and clear of B(y, obstacle_radius)."""
    r = beta * rho if obstacle_radius is None else obstacle_radius
    return (distance(space, x, candidate) + beta * rho <= rho
            and distance(space, candidate, y) > beta * rho + r)


def diffuse_witness(field: Playfield, x, rho, y, beta, obstacle_radius=None):
    """A point x' of E with B(x', beta rho) inside B(x, rho) - B(y, obstacle).

    The obstacle radius defaults to beta*rho.  Returns ``None`` only after
    exhausting every candidate at the playfield's resolution.
    """
    space = field.space
    r = beta * rho if obstacle_radius is None else obstacle_radius
    # concentric reply whenever the obstacle is already far enough
    if distance(space, x, y) > beta * rho + r:
        return x
    for p in field.preference_order(x, rho):
        if witness_is_valid(space, x, rho, y, beta, p, r):
            return p
    return None


@dataclass
class DiffusenessCertificate:
    beta0: Any
    triples: list = field(default_factory=list)  # (x, rho, y, witness)
    failures: list = field(default_factory=list)  # (x, rho, y)

    @property
    def passed(self) -> bool:
        return not self.failures

    def records(self) -> list[dict]:
        out = [{"x": x, "rho": rho, "y": y, "witness": w, "beta0": self.beta0, "ok": True}
               for x, rho, y, w in self.triples]
        out += [{"x": x, "rho": rho, "y": y, "witness": None, "beta0": self.beta0, "ok": False}
                for x, rho, y in self.failures]
        return out


def certify_diffuse(field: Playfield, beta, scales: Sequence, points: Iterable | None = None,
                    obstacles: Callable | None = None) -> DiffusenessCertificate:
    """Run diffuse_witness over sample points, scales and adversarial obstacles.

    ``obstacles(x, rho, beta)`` yields obstacle centers; by default the
    concentric obstacle and the ones at distance beta*rho and 2*beta*rho on
    either side, which are the hardest placements for a witness.
    """
    space = field.space
    cert = DiffusenessCertificate(beta0=beta)
    pts = list(points) if points is not None else field.sample_points()
    if obstacles is None:
        obstacles = default_obstacles
    for x in pts:
        for rho in scales:
            if not field.escapes(x, rho):
                continue
            for y in obstacles(space, x, rho, beta):
                w = diffuse_witness(field, x, rho, y, beta)
                if w is None:
                    cert.failures.append((x, rho, y))
                else:
                    cert.triples.append((x, rho, y, w))
    return cert


def default_obstacles(space: SpaceDescriptor, x, rho, beta) -> list:
    if not space.is_real:
        return [x]
    b = beta * rho
    return [x, x + b, x - b, x + 2 * b, x - 2 * b]


@dataclass
class PerfectnessReport:
    nu: Any
    scales: list
    witnesses: list = field(default_factory=list)  # (x, R, witness)
    failures: list = field(default_factory=list)  # (x, R)
    vacuous: list = field(default_factory=list)  # (x, R) with E inside B(x, R)

    @property
    def passed(self) -> bool:
        return not self.failures

    def records(self) -> list[dict]:
        out = [{"x": x, "R": R, "witness": w, "nu": self.nu, "ok": True} for x, R, w in self.witnesses]
        out += [{"x": x, "R": R, "witness": None, "nu": self.nu, "ok": False} for x, R in self.failures]
        return out


def check_uniform_perfectness(field: Playfield, nu, scales: Sequence,
                              points: Iterable | None = None) -> PerfectnessReport:
    """Look for a point of E in every annulus B(x, R) - B(x, nu R)."""
    if not scales:
        raise ValueError("need at least one scale")
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    space = field.space
    report = PerfectnessReport(nu=nu, scales=list(scales))
    pts = field.sample_points() + list(points or [])
    for x in pts:
        for R in scales:
            if not field.escapes(x, R):
                report.vacuous.append((x, R))
                continue
            w = field.farthest_within(x, R)
            if w is not None and distance(space, x, w) > nu * R:
                report.witnesses.append((x, R, w))
            else:
                report.failures.append((x, R))
    return report


def measure_perfectness(field: SortedPointSet, r_min, r_max, points: Iterable | None = None) -> Fraction:
    """Largest nu for which every annulus with R in [r_min, r_max] is hit.

    For a point x with sorted distances d_j to E, a radius R in [d_j, d_{j+1})
    sees d_j as its farthest point, so the constraint is nu <= d_j / d_{j+1}.
    """
    pts = list(points) if points is not None else field.sample_points()
    arr = field._floats
    best = None
    for x in pts:
        d = np.unique(np.abs(arr - float(x)))
        far = d[-1]
        for j in range(len(d) - 1):
            lo, hi = d[j], d[j + 1]
            if hi <= float(r_min) or lo > float(r_max) or lo >= far:
                continue
            top = min(hi, float(r_max))
            ratio = lo / top
            if best is None or ratio < best[0]:
                best = (ratio, x, lo, top)
    if best is None:
        raise ValueError("no scale in range sees the set escape")
    _, x, lo, top = best
    # recompute the extremal ratio exactly
    dists = sorted(set(abs(p - x) for p in field.points))
    exact_lo = min(dists, key=lambda v: abs(float(v) - lo))
    exact_top = as_fraction(r_max) if top == float(r_max) else min(dists, key=lambda v: abs(float(v) - top))
    return exact_lo / exact_top
