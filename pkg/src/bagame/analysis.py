"""Power-law checks for self-similar measures and box-counting dimension of cylinder sets."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from .diophantine import QuadraticSurd


class InsufficientDepth(RuntimeError):
    """The cylinder depth is too small to decide a query at the requested scale."""


# --------------------------------------------------------------------------
# exact Cantor measure


@functools.lru_cache(maxsize=1 << 16)
def _cantor_function(x: Fraction) -> Fraction:
    return cantor_function(x)


def cantor_function(x) -> Fraction:
    """The Cantor function at a rational x, exactly.

    Rationals have eventually periodic ternary expansions; the repeating
    block is detected and summed as a geometric series.
    """
    x = Fraction(x)
    if x <= 0:
        return Fraction(0)
    if x >= 1:
        return Fraction(1)
    seen: dict[Fraction, int] = {}
    bits: list[int] = []
    while x not in seen:
        seen[x] = len(bits)
        x *= 3
        d = math.floor(x)
        x -= d
        if d == 1:
            # inside a removed middle third: constant on it
            return _binary_value(bits) + Fraction(1, 2 ** (len(bits) + 1))
        bits.append(d // 2)
        if x == 0:
            return _binary_value(bits)
    start = seen[x]
    head = _binary_value(bits[:start])
    period = len(bits) - start
    block = sum(Fraction(b, 2 ** (j + 1)) for j, b in enumerate(bits[start:]))
    return head + block / 2 ** start / (1 - Fraction(1, 2 ** period))


def _binary_value(bits: Sequence[int]) -> Fraction:
    return sum((Fraction(b, 2 ** (j + 1)) for j, b in enumerate(bits)), Fraction(0))


def cantor_ball_measure(x, rho) -> Fraction:
    """Natural measure of B(x, rho) for the middle-thirds Cantor set (it has no atoms)."""
    x, rho = Fraction(x), Fraction(rho)
    return _cantor_function(x + rho) - _cantor_function(x - rho)


def lebesgue_ball_measure(x, rho) -> Fraction:
    x, rho = Fraction(x), Fraction(rho)
    return min(x + rho, Fraction(1)) - max(x - rho, Fraction(0))


# --------------------------------------------------------------------------
# power law


@dataclass
class PowerLawReport:
    delta: float
    C: float
    table: list[dict]
    rejected: list = field(default_factory=list)
    growth: float = 1.0
    stability: float = 2.0
    c_max: Optional[float] = None
    exponent_convention: str = "+delta: mu(B(x, rho)) compared with rho^delta"

    @property
    def diverging(self) -> bool:
        per = [r["C"] for r in self.table]
        half = per[len(per) // 2:]
        return self.growth >= self.stability and all(b >= a for a, b in zip(half, half[1:]))

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.C) or self.growth > self.stability:
            return False
        return self.c_max is None or self.C <= self.c_max

    def record(self) -> dict:
        return {"delta": self.delta, "C": self.C, "growth": self.growth, "passed": self.passed,
                "diverging": self.diverging, "rejected": len(self.rejected),
                "convention": self.exponent_convention, "table": self.table}


def power_law_check(measure: Callable[[Any, Any], Any], delta: float, scales: Sequence,
                    points: Iterable, stability: float = 2.0,
                    c_max: Optional[float] = None) -> PowerLawReport:
    """Best C with C^-1 rho^delta <= mu(B(x, rho)) <= C rho^delta over the samples.

    Per scale the table holds the largest upper ratio mu/rho^delta, the
    largest lower ratio rho^delta/mu and their maximum C_k.  ``growth`` is
    the spread max C_k / min C_k across scales; a pass needs it at most
    ``stability`` (a bounded constant), and C <= c_max when given.
    """
    pts = list(points)
    table = []
    rejected = []
    for rho in scales:
        rd = float(rho) ** delta
        up = down = 0.0
        for x in pts:
            m = float(measure(x, rho))
            if m <= 0:
                rejected.append((x, rho, "zero-measure ball"))
                continue
            up = max(up, m / rd)
            down = max(down, rd / m)
        table.append({"rho": float(rho), "upper": up, "lower": down, "C": max(up, down)})
    per = [r["C"] for r in table if r["C"] > 0]
    C = max(per) if per else math.inf
    growth = max(per) / min(per) if per else math.inf
    return PowerLawReport(float(delta), C, table, rejected, growth, stability, c_max)


# --------------------------------------------------------------------------
# cylinder systems


class CantorCylinders:
    """Middle-thirds Cantor set as nested cylinders [a, a + 3^-k] with endpoints in the set."""

    description = "middle-thirds Cantor set"

    def __init__(self, depth: int = 40):
        self.depth = depth

    def root(self):
        return (Fraction(0), 0)

    def children(self, node):
        a, k = node
        w = Fraction(1, 3 ** (k + 1))
        return [(a, k + 1), (a + 2 * w, k + 1)]

    def hull(self, node):
        a, k = node
        return a, a + Fraction(1, 3 ** k)

    def level(self, node) -> int:
        return node[1]


class _MobiusPoint:
    """(A u + B)/(C u + D) for the quadratic irrational u = (P + sqrt(S)) / Q."""

    __slots__ = ("coef", "u", "value")

    def __init__(self, A, B, C, D, u: QuadraticSurd, uf: float):
        self.coef = (A, B, C, D)
        self.u = u
        self.value = (A * uf + B) / (C * uf + D)

    def scaled_floor(self, m: int) -> int:
        """floor(m x) exactly; floats decide unless the value is near an integer."""
        v = self.value * m
        f = math.floor(v)
        if 1e-7 < v - f < 1 - 1e-7:
            return f
        A, B, C, D = self.coef
        P, S, Q = self.u.P, self.u.D, self.u.Q
        # x = ((A P + B Q) + A sqrt S) / ((C P + D Q) + C sqrt S), rationalized
        a1, b1 = A * P + B * Q, A
        a2, b2 = C * P + D * Q, C
        X = a1 * a2 - b1 * b2 * S
        Y = b1 * a2 - a1 * b2
        Z = a2 * a2 - b2 * b2 * S
        return QuadraticSurd.from_parts(m * X, m * Y, S, Z).floor()

    def below(self, r: Fraction) -> bool:
        """x < r, exactly (x is irrational)."""
        return self.scaled_floor(r.denominator) < r.numerator


class DigitCylinders:
    """{x in (0, 1): every partial quotient <= N} as cylinders of continued-fraction words.

    A word maps the tail t to [0; a_1, ..., a_k + t]; the tails range over
    the set itself, whose hull is [[0; N, 1, N, 1, ...], [0; 1, N, 1, N, ...]].
    Both hull ends are quadratic irrationals in the set, so every cylinder
    hull has its ends in the set.
    """

    def __init__(self, N: int, depth: int = 60):
        if N < 1:
            raise ValueError("N must be at least 1")
        self.N = N
        self.depth = depth
        self.description = f"partial quotients bounded by {N}"
        disc = N * N + 4 * N
        # N u^2 + N u - 1 = 0 and v^2 + N v - N = 0
        self.lo_end = QuadraticSurd.from_parts(-N, 1, disc, 2 * N)
        self.hi_end = QuadraticSurd.from_parts(-N, 1, disc, 2)
        self.lo_float, self.hi_float = float(self.lo_end), float(self.hi_end)

    def root(self):
        return (1, 0, 0, 1, 0)

    def children(self, node):
        A, B, C, D, k = node
        return [(B, A + n * B, D, C + n * D, k + 1) for n in range(1, self.N + 1)]

    def hull(self, node):
        A, B, C, D, _ = node
        p = _MobiusPoint(A, B, C, D, self.lo_end, self.lo_float)
        q = _MobiusPoint(A, B, C, D, self.hi_end, self.hi_float)
        return (p, q) if p.value <= q.value else (q, p)

    def level(self, node) -> int:
        return node[4]


def _floor_scaled(x, m: int) -> int:
    if isinstance(x, _MobiusPoint):
        return x.scaled_floor(m)
    return math.floor(x * m)


def _below(x, r: Fraction) -> bool:
    return x.below(r) if isinstance(x, _MobiusPoint) else x < r


@dataclass
class SetOracle:
    """Membership oracle for a cylinder system: does [lo, hi) meet the set?"""

    system: Any
    depth: int

    @property
    def description(self) -> str:
        return self.system.description

    def meets(self, lo, hi) -> bool:
        lo, hi = Fraction(lo), Fraction(hi)
        stack = [self.system.root()]
        while stack:
            node = stack.pop()
            l, h = self.system.hull(node)
            if _below(h, lo) or not _below(l, hi):
                continue
            if not _below(l, lo) or _below(h, hi):
                return True  # a hull end, which is in the set, lies in [lo, hi)
            if self.system.level(node) >= self.depth:
                raise InsufficientDepth(f"depth {self.depth} cannot decide [{lo}, {hi})")
            stack.extend(self.system.children(node))
        return False

    def count_boxes(self, base: int, k: int) -> int:
        """Number of boxes [i b^-k, (i+1) b^-k) meeting the set.

        Boxes holding a hull end are met; a cylinder is refined only while
        its hull ends are more than one box apart.
        """
        m = base ** k
        boxes: set[int] = set()
        stack = [self.system.root()]
        while stack:
            node = stack.pop()
            l, h = self.system.hull(node)
            i, j = _floor_scaled(l, m), _floor_scaled(h, m)
            boxes.add(min(i, m - 1))
            boxes.add(min(j, m - 1))
            if j - i <= 1:
                continue
            if self.system.level(node) >= self.depth:
                raise InsufficientDepth(f"depth {self.depth} too small for scale {base}^-{k}")
            stack.extend(self.system.children(node))
        return len(boxes)


class FunctionOracle:
    """Wraps a plain ``meets(lo, hi)`` callable."""

    def __init__(self, meets: Callable[[Fraction, Fraction], bool], description: str = "set"):
        self._meets = meets
        self.description = description

    def meets(self, lo, hi) -> bool:
        return self._meets(Fraction(lo), Fraction(hi))


def ba_digit_set_oracle(N: int, depth: int = 60) -> SetOracle:
    return SetOracle(DigitCylinders(N, depth), depth)


def cantor_set_oracle(depth: int = 40) -> SetOracle:
    return SetOracle(CantorCylinders(depth), depth)


# --------------------------------------------------------------------------
# box dimension


@dataclass
class DimensionEstimate:
    description: str
    base: int
    exponents: list[int]
    counts: list[int]
    slope: float
    halfwidth: float
    dropped: int = 2
    raw_slope: Optional[float] = None
    method: str = "refine"
    meta: dict = field(default_factory=dict)

    @property
    def scales(self) -> list[Fraction]:
        return [Fraction(1, self.base ** k) for k in self.exponents]

    def csv(self) -> str:
        lines = ["scale,count"]
        lines += [f"{self.base}^-{k},{c}" for k, c in zip(self.exponents, self.counts)]
        return "\n".join(lines) + "\n"

    def record(self) -> dict:
        return {"set": self.description, "base": self.base, "exponents": self.exponents,
                "counts": self.counts, "estimate": self.slope, "halfwidth": self.halfwidth,
                "dropped_coarsest": self.dropped, "method": self.method, **self.meta}


def _refine_counts(oracle, base: int, exponents: Sequence[int]) -> list[int]:
    """Counts by subdividing met boxes level by level (a box missing the set has no met children)."""
    wanted = set(exponents)
    counts = {}
    boxes = [0]
    for k in range(1, max(exponents) + 1):
        m = base ** k
        nxt = []
        for i in boxes:
            for j in range(i * base, i * base + base):
                if oracle.meets(Fraction(j, m), Fraction(j + 1, m)):
                    nxt.append(j)
        boxes = nxt
        if k in wanted:
            counts[k] = len(boxes)
    return [counts[k] for k in exponents]


def fit_slope(exponents: Sequence[int], counts: Sequence[int], base: int) -> tuple[float, float]:
    """OLS slope of log N against log(1/rho), with a two-standard-error half-width."""
    x = np.array(exponents, dtype=float) * math.log(base)
    y = np.log(np.array(counts, dtype=float))
    (slope, icept), res, *_ = np.polyfit(x, y, 1, full=True)
    n = len(x)
    if n > 2:
        resid = y - (slope * x + icept)
        se = math.sqrt(float(resid @ resid) / (n - 2) / float(((x - x.mean()) ** 2).sum()))
    else:
        se = math.inf
    return float(slope), 2 * se


def box_dimension(oracle, exponents: Sequence[int], base: int = 2, drop: int = 2,
                  method: str = "auto", ambient: float = 1.0) -> DimensionEstimate:
    """Box-counting dimension of a subset of [0, 1] from counts at scales base^-k.

    The ``drop`` coarsest scales are excluded from the fit.  ``method`` is
    "refine" (generic, uses only ``meets``), "fast" (``count_boxes``) or
    "auto" (fast when available).
    """
    exponents = sorted(exponents)
    if len(exponents) - drop < 3:
        raise ValueError("need at least three scales in the fit")
    if method == "auto":
        method = "fast" if hasattr(oracle, "count_boxes") else "refine"
    if method == "fast":
        counts = [oracle.count_boxes(base, k) for k in exponents]
    else:
        counts = _refine_counts(oracle, base, exponents)
    if any(c == 0 for c in counts):
        raise ValueError("the set is empty at some scale")
    raw, hw = fit_slope(exponents[drop:], counts[drop:], base)
    slope = min(max(raw, 0.0), ambient)
    return DimensionEstimate(getattr(oracle, "description", "set"), base, list(exponents), counts,
                             slope, hw, drop, raw, method)


def dimension_of_ba_digits(N: int, exponents: Sequence[int] = range(6, 15), base: int = 2,
                           depth: int = 60) -> DimensionEstimate:
    if N < 2:
        raise ValueError("N must be at least 2")
    est = box_dimension(ba_digit_set_oracle(N, depth), exponents, base)
    est.meta["substitution"] = "bounded partial quotients stand in for the uniformly perfect subset"
    est.meta["N"] = N
    return est


def cantor_dimension(exponents: Sequence[int] = range(4, 13), method: str = "auto") -> DimensionEstimate:
    return box_dimension(cantor_set_oracle(), exponents, base=3, method=method)
