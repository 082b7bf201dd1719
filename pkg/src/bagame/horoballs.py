"""Disjoint horoball families: Ford circles, file-loaded families, rescaling, location queries."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Iterable, Optional

from .hyperbolic import INF, I, HPoint, Horoball, halfplane_horoball, scale_horoball, tree_horoball
from .metric import SpaceDescriptor


class FamilyError(ValueError):
    """A horoball family file was malformed or not disjoint."""

    def __init__(self, message, violations=None, line=None):
        super().__init__(message)
        self.violations = violations or []
        self.line = line


@dataclass
class GroupDescriptor:
    name: str
    parabolics: list
    critical_exponent: float
    comparability: Optional[float] = None

    def __post_init__(self):
        if self.critical_exponent <= 0:
            raise ValueError("non-elementary groups have positive critical exponent")


PSL2Z = GroupDescriptor("PSL(2,Z)", parabolics=[INF], critical_exponent=1.0)


class _LocationIndex:
    """Members bucketed into dyadic diameter bands, each band sorted by base."""

    def __init__(self, members: list[Horoball]):
        self.bands: list[tuple[list[float], list[Horoball], float]] = []
        grouped: dict[int, list[Horoball]] = {}
        for h in members:
            band = -math.floor(math.log2(float(h.euclidean_diameter)))
            grouped.setdefault(band, []).append(h)
        for band in sorted(grouped):
            hs = sorted(grouped[band], key=lambda h: h.base)
            dmax = max(float(h.euclidean_diameter) for h in hs)
            self.bands.append(([float(h.base) for h in hs], hs, dmax))

    def candidates(self, x, y) -> Iterable[Horoball]:
        fx, fy = float(x), float(y)
        for bases, hs, dmax in self.bands:
            # a disk of diameter D only reaches heights below D
            if dmax * (1 + 1e-9) < fy:
                continue
            # float bases and query are within 1e-16 relative of the exact values
            half = dmax / 2 * (1 + 1e-9) + 1e-12
            lo = bisect.bisect_left(bases, fx - half)
            hi = bisect.bisect_right(bases, fx + half)
            yield from hs[lo:hi]


@dataclass
class HoroballFamily:
    members: list[Horoball]
    generation: str = "user"
    infinity: Optional[Horoball] = None
    parent: Optional["HoroballFamily"] = None
    certificate: dict = field(default_factory=dict)
    basepoint: HPoint = I

    def __post_init__(self):
        self._index = _LocationIndex(self.members)
        self._by_base = {h.base: h for h in self.members}

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def by_base(self, base) -> Optional[Horoball]:
        return self._by_base.get(base)

    def candidates(self, z: HPoint):
        return self._index.candidates(z.x, z.y)

    def subfamily(self, keep, name: str) -> "HoroballFamily":
        return HoroballFamily([h for h in self.members if keep(h)], generation=name,
                              infinity=self.infinity, parent=self, basepoint=self.basepoint)


def _ford_denominator(h: Horoball) -> int:
    return h.base.denominator


def generate_ford(qmax: int) -> HoroballFamily:
    """One disk per reduced p/q in [0, 1] with q <= qmax, diameter 1/q^2."""
    if qmax < 1:
        raise ValueError("qmax must be at least 1")
    members = []
    for q in range(1, qmax + 1):
        for p in range(0, q + 1):
            if gcd(p, q) == 1:
                members.append(halfplane_horoball(Fraction(p, q), Fraction(1, q * q)))
    members.sort(key=lambda h: h.base)
    fam = HoroballFamily(members, generation=f"ford({qmax})",
                         infinity=halfplane_horoball(INF, Fraction(1)))
    fam.certificate = check_disjoint(fam)
    return fam


def check_disjoint(F: HoroballFamily) -> dict:
    """Exact pairwise test; tangency is allowed.

    Disks tangent to the axis at b1, b2 with diameters D1, D2 have disjoint
    interiors iff (b1 - b2)^2 >= D1 D2.  Only pairs with |b1 - b2| < max(D1, D2)
    can fail, so each member is compared with the smaller members near it.
    """
    ms = F.members
    bases = [h.base for h in ms]
    floats = [float(b) for b in bases]
    checked = 0
    violations = []
    for i, h in enumerate(ms):
        D = h.euclidean_diameter
        fD = float(D) * (1 + 1e-9)
        j0 = bisect.bisect_left(floats, floats[i] - fD)
        j1 = bisect.bisect_right(floats, floats[i] + fD)
        for j in range(j0, j1):
            if j == i:
                continue
            g = ms[j]
            Dg = g.euclidean_diameter
            if Dg > D or (Dg == D and j < i):
                continue
            checked += 1
            if (h.base - g.base) ** 2 < D * Dg:
                violations.append((h.base, g.base))
    return {"checked_pairs": checked, "violations": violations, "disjoint": not violations}


def locate(F: HoroballFamily, z: HPoint, include_infinity: bool = False) -> Optional[Horoball]:
    """The member whose interior contains z, if any."""
    for h in F.candidates(z):
        if h.contains(z, interior=True):
            return h
    if include_infinity and F.infinity is not None and F.infinity.contains(z, interior=True):
        return F.infinity
    return None


def locate_bruteforce(F: HoroballFamily, z: HPoint) -> Optional[Horoball]:
    hits = [h for h in F.members if h.contains(z, interior=True)]
    if len(hits) > 1:
        raise FamilyError("point lies in two members; family is not disjoint")
    return hits[0] if hits else None


def basepoint_outside(F: HoroballFamily) -> bool:
    o = F.basepoint
    return not any(h.contains(o, interior=True) for h in F.members)


def rescale_family(F: HoroballFamily, s) -> HoroballFamily:
    """Memberwise shadow rescaling by s in (0, 1)."""
    if not 0 < s < 1:
        raise ValueError("scaling factor must lie in (0, 1)")
    members = [scale_horoball(h, s, F.basepoint) for h in F.members]
    fam = HoroballFamily(members, generation=f"rescaled({F.generation}, {s})",
                         infinity=F.infinity, parent=F, basepoint=F.basepoint)
    fam.certificate = check_disjoint(fam)
    if not basepoint_outside(fam):
        raise FamilyError("basepoint still inside a rescaled member")
    return fam


def family_from_records(records: Iterable[tuple], generation: str = "user") -> HoroballFamily:
    members = [halfplane_horoball(b, d) for b, d in records]
    members.sort(key=lambda h: h.base)
    fam = HoroballFamily(members, generation=generation)
    fam.certificate = check_disjoint(fam)
    return fam


def parse_family_line(line: str, lineno: int) -> Optional[tuple[Fraction, Fraction]]:
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    fields = {}
    for tok in text.replace(",", " ").split():
        if "=" not in tok:
            raise FamilyError(f"line {lineno}: expected key=value, got {tok!r}", line=lineno)
        k, v = tok.split("=", 1)
        fields[k.strip()] = v.strip()
    try:
        base = Fraction(fields["base"])
        diam = Fraction(fields["diameter"])
    except KeyError as e:
        raise FamilyError(f"line {lineno}: missing field {e.args[0]}", line=lineno) from None
    except (ValueError, ZeroDivisionError) as e:
        raise FamilyError(f"line {lineno}: bad rational ({e})", line=lineno) from None
    if diam <= 0:
        raise FamilyError(f"line {lineno}: diameter must be positive", line=lineno)
    return base, diam


def load_family(path) -> HoroballFamily:
    """Read ``base=p/q diameter=r/s`` records, one per line; reject overlapping families."""
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        rec = parse_family_line(line, lineno)
        if rec is not None:
            records.append(rec)
    fam = family_from_records(records, generation=f"file({path})")
    if not fam.certificate["disjoint"]:
        raise FamilyError("family is not disjoint", violations=fam.certificate["violations"])
    return fam


def dump_family(F: HoroballFamily) -> str:
    return "".join(f"base={h.base} diameter={h.euclidean_diameter}\n" for h in F.members)


def ford_shadow_ratio(F: HoroballFamily) -> tuple[float, float]:
    """Range of R_j q^2 over a Ford family: the comparability constants with 1/q^2."""
    vals = [h.shadow_radius * h.base.denominator ** 2 for h in F.members]
    return min(vals), max(vals)


# --------------------------------------------------------------------------
# tree families


def tree_horoballs_disjoint(g: Horoball, h: Horoball) -> bool:
    """Levels -k, -k' at distinct ends with overlap m are disjoint iff k + k' > 2m."""
    from .hyperbolic import overlap

    if g.base == h.base:
        return False
    return -g.level - h.level > 2 * overlap(g.base, h.base)


@dataclass
class TreeHoroballFamily:
    members: list[Horoball]
    space: SpaceDescriptor
    generation: str = "tree"

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def locate(self, p) -> Optional[Horoball]:
        hits = [h for h in self.members if h.contains(p)]
        if len(hits) > 1:
            raise FamilyError("point lies in two members; family is not disjoint")
        return hits[0] if hits else None

    def check_disjoint(self) -> dict:
        bad = [(g.base, h.base) for i, g in enumerate(self.members)
               for h in self.members[i + 1:] if not tree_horoballs_disjoint(g, h)]
        return {"checked_pairs": len(self.members) * (len(self.members) - 1) // 2,
                "violations": bad, "disjoint": not bad}


def generate_tree_family(space: SpaceDescriptor, max_level: Optional[int] = None,
                         stride: int = 3) -> TreeHoroballFamily:
    """Greedy disjoint family: every ``stride``-th end, levels 1 .. max_level, shallow first.

    A candidate at level -k clashes with a chosen member at level -k' sharing
    a prefix of length m iff k + k' <= 2m, so it suffices to keep the
    smallest chosen k' below every prefix.
    """
    import itertools

    max_level = max_level or space.depth
    digits = "".join(str(j) for j in range(space.branching))
    ends = ["".join(w) for w in itertools.product(digits, repeat=space.depth)]
    chosen: list[Horoball] = []
    lowest: dict[str, int] = {}
    for k in range(1, max_level + 1):
        for j, xi in enumerate(ends):
            if (j + k) % stride:
                continue
            if any(lowest.get(xi[:m], k + 1 + 2 * space.depth) <= 2 * m - k
                   for m in range(space.depth + 1)):
                continue
            chosen.append(tree_horoball(xi, -k, space))
            for m in range(space.depth + 1):
                lowest[xi[:m]] = min(lowest.get(xi[:m], k), k)
    return TreeHoroballFamily(chosen, space, generation=f"tree({space.branching},{space.depth})")
