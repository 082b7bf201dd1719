"""Upper half-plane and real-tree models: rays, Busemann functions, horoballs, shadows.

Half-plane horoballs based at a real point are Euclidean disks tangent to
the real axis; the one at infinity is {y >= level}.  Tree horoballs are
sublevel sets of the Busemann function b(x) = d(o, x) - 2 (x | xi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional

import mpmath

from .metric import SpaceDescriptor, common_prefix, tree_overlap_needed, tree_power

INF = math.inf


@dataclass(frozen=True)
class HPoint:
    x: Any
    y: Any

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("half-plane points need y > 0")


I = HPoint(Fraction(0), Fraction(1))


def hyp_distance(z: HPoint, w: HPoint) -> float:
    # 2 asinh(|z-w| / (2 sqrt(y_z y_w))), equal to arccosh(1 + |z-w|^2 / (2 y_z y_w))
    dx = float(z.x - w.x)
    dy = float(z.y - w.y)
    return 2.0 * math.asinh(math.hypot(dx, dy) / (2.0 * math.sqrt(float(z.y) * float(w.y))))


def _is_infinite(xi) -> bool:
    return isinstance(xi, float) and math.isinf(xi)


@dataclass(frozen=True)
class GeodesicRay:
    """Unit-speed ray from ``basepoint`` to the boundary point ``endpoint``."""

    endpoint: Any
    basepoint: HPoint = I

    def _normalized_endpoint(self):
        u, v = self.basepoint.x, self.basepoint.y
        return INF if _is_infinite(self.endpoint) else (self.endpoint - u) / v


def _ray_point(xi, w):
    """Point at e^-t = w on the ray from i to xi (rotation of the ray i -> 0)."""
    denom = 1 + w * w * xi * xi
    return xi * (1 - w * w) / denom, w * (1 + xi * xi) / denom


def geodesic_point(ray: GeodesicRay, t) -> HPoint:
    if t < 0:
        raise ValueError("t must be nonnegative")
    u, v = float(ray.basepoint.x), float(ray.basepoint.y)
    xi = ray._normalized_endpoint()
    if _is_infinite(xi):
        return HPoint(u, v * math.exp(t))
    X, Y = _ray_point(float(xi), math.exp(-t))
    return HPoint(u + v * X, v * Y)


def geodesic_point_at_scale(ray: GeodesicRay, w) -> HPoint:
    """Exact point of the ray at arclength -log(w), for rational w in (0, 1]."""
    u, v = ray.basepoint.x, ray.basepoint.y
    xi = ray._normalized_endpoint()
    if _is_infinite(xi):
        return HPoint(u, v / w)
    X, Y = _ray_point(xi, w)
    return HPoint(u + v * X, v * Y)


def busemann(ray: GeodesicRay, z: HPoint) -> float:
    """b(z) = lim d(ray(t), z) - t, normalized so that b(basepoint) = 0."""
    u, v = float(ray.basepoint.x), float(ray.basepoint.y)
    x, y = float(z.x), float(z.y)
    if _is_infinite(ray.endpoint):
        return math.log(v / y)
    xi = float(ray.endpoint)
    return math.log(((x - xi) ** 2 + y * y) / y) - math.log(((u - xi) ** 2 + v * v) / v)


# --------------------------------------------------------------------------
# trees


@dataclass(frozen=True)
class TreePoint:
    """The point at distance t from the root along the ray to ``ray``."""

    ray: str
    t: Any


def overlap(p: str, q: str):
    return INF if p == q else common_prefix(p, q)


def tree_distance(p: TreePoint, q: TreePoint):
    m = min(p.t, q.t, overlap(p.ray, q.ray))
    return p.t + q.t - 2 * m


def tree_busemann(xi: str, p: TreePoint):
    return p.t - 2 * min(p.t, overlap(p.ray, xi))


def tree_busemann_limit(xi: str, p: TreePoint, T) -> Any:
    """d(gamma_xi(T), p) - T; equals the Busemann value once T exceeds the branch point."""
    return tree_distance(TreePoint(xi, T), p) - T


# --------------------------------------------------------------------------
# Gromov products


def gromov_product(space: Optional[SpaceDescriptor], x, y, o: HPoint = I):
    """(x|y)_o for interior points, boundary points, or a mix of the two.

    Tree boundary points give the exact common-prefix length.  Half-plane
    boundary values use the limit along radial sequences, which for the
    hyperbolic plane is -log(|xi - eta| / sqrt((1 + xi^2)(1 + eta^2))) after
    moving o to i.
    """
    if space is not None and space.is_tree:
        if isinstance(x, TreePoint) and isinstance(y, TreePoint):
            return min(x.t, y.t, overlap(x.ray, y.ray))
        return overlap(x, y)
    if isinstance(x, HPoint) and isinstance(y, HPoint):
        return 0.5 * (hyp_distance(x, o) + hyp_distance(y, o) - hyp_distance(x, y))
    if isinstance(x, HPoint):
        x, y = y, x
    if isinstance(y, HPoint):
        ray = GeodesicRay(x, o)
        return 0.5 * (hyp_distance(y, o) - busemann(ray, y))
    u, v = float(o.x), float(o.y)
    if x == y:
        return INF
    if _is_infinite(x) or _is_infinite(y):
        finite = float(y if _is_infinite(x) else x)
        f = (finite - u) / v
        return -math.log(1.0 / math.sqrt(1 + f * f))
    a, b = (float(x) - u) / v, (float(y) - u) / v
    return -math.log(abs(a - b) / math.sqrt((1 + a * a) * (1 + b * b)))


def gromov_product_radial(x, y, n: float, o: HPoint = I) -> float:
    """(gamma_x(n) | gamma_y(n)), the radial-sequence approximation."""
    return gromov_product(None, geodesic_point(GeodesicRay(x, o), n),
                          geodesic_point(GeodesicRay(y, o), n), o)


# --------------------------------------------------------------------------
# horoballs and shadows


@dataclass(frozen=True)
class BoundaryBall:
    center: Any
    radius: Any
    lo: Any = None
    hi: Any = None


@dataclass(frozen=True)
class Horoball:
    """A horoball based at ``base``: {b_base <= level} for the basepoint-normalized Busemann function.

    ``shadow_radius`` is the smallest R with shadow inside B(base, R), to
    ``tolerance`` (zero for trees, where it is exact).
    """

    base: Any
    level: Any
    shadow_radius: Any
    euclidean_diameter: Optional[Fraction] = None
    model: str = "halfplane"
    tolerance: float = 0.0

    @property
    def at_infinity(self) -> bool:
        return self.model == "halfplane" and _is_infinite(self.base)

    def contains(self, z, interior: bool = False) -> bool:
        if self.model == "tree":
            b = tree_busemann(self.base, z)
            return b < self.level if interior else b <= self.level
        if self.at_infinity:
            # {y >= e^-level} with basepoint i
            h = self.euclidean_diameter
            return z.y > h if interior else z.y >= h
        D = self.euclidean_diameter
        # (x - xi)^2 + (y - D/2)^2 <= D^2/4  <=>  (x - xi)^2 + y^2 <= D y
        fx, fy, fD = float(z.x) - float(self.base), float(z.y), float(D)
        gap = fx * fx + fy * fy - fD * fy
        if abs(gap) > 1e-9 * (fx * fx + fy * fy + fD * fy):
            return gap < 0
        lhs = (z.x - self.base) ** 2 + z.y * z.y
        return lhs < D * z.y if interior else lhs <= D * z.y


def _mp(v):
    """mpmath number from an int, float, Fraction or mpf."""
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _shadow_halfplane_i(xi, D):
    """Shadow from i of the disk tangent at xi with diameter D: (lo, hi), possibly through infinity.

    In the disk model centered at i the horodisk subtends the angle alpha
    with sin(alpha) = D / (1 + xi^2); boundary angle theta corresponds to
    x = -cot(theta / 2).
    """
    xi = _mp(xi)
    s = _mp(D) / (1 + xi * xi)
    if s > 1:
        raise ValueError("the basepoint lies inside the horoball; rescale the family first")
    k = (1 + mpmath.sqrt(1 - s * s)) / s  # cot(alpha/2)
    lo = (xi * k - 1) / (k + xi) if k + xi > 0 else mpmath.mpf("-inf")
    hi = (xi * k + 1) / (k - xi) if k - xi > 0 else mpmath.mpf("inf")
    return lo, hi, k


def _diameter_for_shadow_i(xi, R):
    """Inverse of the shadow law: diameter whose shadow from i has radius R about xi."""
    xi = _mp(xi)
    k = (1 + xi * xi) / _mp(R) + abs(xi)
    sin_alpha = 2 * k / (k * k + 1)
    return (1 + xi * xi) * sin_alpha


def halfplane_horoball(base, diameter, o: HPoint = I, dps: int = 40) -> Horoball:
    """Euclidean disk tangent to the real axis at ``base`` (or the region y >= diameter at infinity)."""
    diameter = Fraction(diameter)
    if diameter <= 0:
        raise ValueError("euclidean diameter must be positive")
    u, v = o.x, o.y
    if _is_infinite(base):
        return Horoball(base=INF, level=math.log(float(v / diameter)), shadow_radius=INF,
                        euclidean_diameter=diameter)
    base = Fraction(base)
    level = math.log(float(diameter * v / ((u - base) ** 2 + v * v)))
    with mpmath.workdps(dps):
        lo, hi, _ = _shadow_halfplane_i((base - u) / v, diameter / v)
        c = _mp((base - u) / v)
        R = max(c - lo, hi - c) * _mp(v)
        R = float(R)
    return Horoball(base=base, level=level, shadow_radius=R, euclidean_diameter=diameter,
                    tolerance=1e-15 * max(1.0, R))


def tree_horoball(base: str, level, space: SpaceDescriptor) -> Horoball:
    if level >= 0:
        raise ValueError("the root lies inside a tree horoball with level >= 0")
    k = math.ceil(-level - 1e-12)
    return Horoball(base=base, level=level, shadow_radius=tree_power(space, k), model="tree")


def shadow(H: Horoball, o: HPoint = I, space: Optional[SpaceDescriptor] = None) -> BoundaryBall:
    """Boundary ball of ray endpoints from o meeting H."""
    if H.model == "tree":
        if H.level >= 0:
            raise ValueError("the root lies inside the horoball")
        return BoundaryBall(H.base, H.shadow_radius)
    if H.at_infinity:
        if o.y >= H.euclidean_diameter:
            raise ValueError("the basepoint lies inside the horoball")
        return BoundaryBall(H.base, INF)
    u, v = o.x, o.y
    with mpmath.workdps(40):
        lo, hi, _ = _shadow_halfplane_i((H.base - u) / v, H.euclidean_diameter / v)
        lo = float(u + v * lo)
        hi = float(u + v * hi)
    R = max(float(H.base) - lo, hi - float(H.base))
    return BoundaryBall(H.base, R, lo, hi)


def ray_meets_disk(endpoint, H: Horoball, o: HPoint = I, samples: int = 4000) -> bool:
    """Brute-force test of whether the ray from o to ``endpoint`` touches H.

    Walks the ray at fine arclength steps, refining near the closest
    approach; used as an oracle for the closed-form shadow.
    """
    ray = GeodesicRay(endpoint, o)
    D = float(H.euclidean_diameter)
    xi = float(H.base)

    def gap(t):
        z = geodesic_point(ray, t)
        return (float(z.x) - xi) ** 2 + float(z.y) ** 2 - D * float(z.y)

    tmax = 60.0
    ts = [tmax * j / samples for j in range(samples + 1)]
    vals = [gap(t) for t in ts]
    j = min(range(len(vals)), key=vals.__getitem__)
    lo, hi = ts[max(j - 1, 0)], ts[min(j + 1, samples)]
    for _ in range(100):
        m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if gap(m1) < gap(m2):
            hi = m2
        else:
            lo = m1
    return min(vals[j], gap((lo + hi) / 2)) <= 0


def scale_horoball(H: Horoball, s, o: HPoint = I, space: Optional[SpaceDescriptor] = None) -> Horoball:
    """sH: the largest horoball at the same base whose shadow lies in B(base, s R)."""
    if not 0 < s < 1:
        raise ValueError("scaling factor must lie in (0, 1)")
    if H.model == "tree":
        if space is None:
            raise ValueError("tree horoballs need their space to rescale")
        k = tree_overlap_needed(space, H.shadow_radius * s)
        return Horoball(base=H.base, level=-k, shadow_radius=tree_power(space, k), model="tree")
    if H.at_infinity:
        raise ValueError("the horoball at infinity has no finite shadow radius")
    u, v = o.x, o.y
    with mpmath.workdps(40):
        target = _mp(H.shadow_radius) * _mp(s) / _mp(v)
        Dn = _diameter_for_shadow_i(_mp((H.base - u) / v), target) * _mp(v)
        D = Fraction(mpmath.nstr(Dn, 35, min_fixed=-10**6, max_fixed=10**6))
    return halfplane_horoball(H.base, D, o)


def horoball_from_boundary_ball(xi, r, space: Optional[SpaceDescriptor] = None, o: HPoint = I) -> Horoball:
    """The horoball {b_xi <= log_a r} attached to the boundary ball B(xi, r)."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if space is not None and space.is_tree:
        a = space.visual_a
        if float(a).is_integer():
            k = round(math.log(float(r), float(a)))
            level = k if tree_power(space, -k) == r else math.log(float(r), float(a))
        else:
            level = math.log(float(r)) / math.log(float(a))
        if level >= 0:
            raise ValueError("radius too large: the root would lie in the horoball")
        return tree_horoball(xi, level, space)
    u, v = o.x, o.y
    xi = Fraction(xi)
    # b_xi(top of disk) = log(D v / ((u - xi)^2 + v^2)) must equal log r
    D = Fraction(r) * ((u - xi) ** 2 + v * v) / v
    return halfplane_horoball(xi, D, o)


def tree_shadow_members(H: Horoball, space: SpaceDescriptor) -> set[str]:
    """Every depth-d boundary point whose ray meets H, found by walking the ray.

    Busemann values come from the distance limit d(gamma_xi(T), x) - T at a
    T past the tree depth, independent of the closed form.
    """
    import itertools

    digits = "".join(str(j) for j in range(space.branching))
    T = space.depth + 10
    # half-integer times, doubled so the arithmetic stays in integers
    steps = range(2 * space.depth + 3)
    level2 = 2 * H.level
    out = set()
    for word in itertools.product(digits, repeat=space.depth):
        eta = "".join(word)
        m2 = 2 * overlap(H.base, eta)
        # d(gamma_xi(T), gamma_eta(t)) - T, with the branch point at min(t, T, m)
        if any(2 * T + t2 - 2 * min(t2, 2 * T, m2) - 2 * T <= level2 for t2 in steps):
            out.add(eta)
    return out
