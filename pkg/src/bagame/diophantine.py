"""Continued fractions and the Ford-circle badly-approximable check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Any, Callable, Iterator, Optional

import mpmath


class _Truncated:
    """Marks the point where the input precision stopped certifying digits."""

    def __repr__(self):
        return "TRUNCATED"


TRUNCATED = _Truncated()


@dataclass(frozen=True)
class QuadraticSurd:
    """The real number (P + sqrt(D)) / Q, with D > 0 not a perfect square."""

    P: int
    D: int
    Q: int

    def __post_init__(self):
        if self.Q == 0 or self.D <= 0:
            raise ValueError("need Q != 0 and D > 0")
        r = isqrt(self.D)
        if r * r == self.D:
            raise ValueError("D is a perfect square; use a Fraction")

    @classmethod
    def from_parts(cls, a: int, b: int, d: int, c: int) -> "QuadraticSurd":
        """(a + b sqrt(d)) / c."""
        if b == 0:
            raise ValueError("b = 0 gives a rational")
        if b < 0:
            a, b, c = -a, -b, -c
        P, D, Q = a, b * b * d, c
        if (D - P * P) % Q:
            P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
        return cls(P, D, Q)

    def floor(self) -> int:
        # floor((P + sqrt D) / Q) with sqrt D irrational
        s = isqrt(self.D)
        if self.Q > 0:
            return (self.P + s) // self.Q
        return -((self.P + s) // -self.Q) - 1

    def __float__(self):
        return (self.P + math.sqrt(self.D)) / self.Q

    def interval(self, digits: int = 60) -> tuple[Fraction, Fraction]:
        scale = 10 ** digits
        s = isqrt(self.D * scale * scale)
        lo, hi = Fraction(self.P * scale + s, scale), Fraction(self.P * scale + s + 1, scale)
        lo, hi = lo / self.Q, hi / self.Q
        return (lo, hi) if lo <= hi else (hi, lo)


GOLDEN = QuadraticSurd.from_parts(-1, 1, 5, 2)


def _surd_digits(x: QuadraticSurd, n: int) -> list[int]:
    P, D, Q = x.P, x.D, x.Q
    if (D - P * P) % Q:
        raise ValueError("unnormalized surd")
    out = []
    s = isqrt(D)
    a0 = QuadraticSurd(P, D, Q).floor()
    P = a0 * Q - P
    Q = (D - P * P) // Q
    while len(out) < n:
        a = (P + s) // Q
        out.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    return out


def _rational_digits(x: Fraction, n: int) -> list[int]:
    out = []
    x = x - math.floor(x)
    while x and len(out) < n:
        x = 1 / x
        a = math.floor(x)
        out.append(a)
        x -= a
    return out


def _interval_digits(lo: Fraction, hi: Fraction, n: int) -> list:
    out: list = []
    while len(out) < n:
        if lo <= 0 and hi >= 0:
            out.append(TRUNCATED)
            break
        if lo == 0:
            break
        a_lo, a_hi = 1 / hi, 1 / lo
        fa, fb = math.floor(a_lo), math.floor(a_hi)
        if fa != fb or a_hi == fb:
            out.append(TRUNCATED)
            break
        out.append(fa)
        lo, hi = a_lo - fa, a_hi - fa
    return out


def to_interval(x: Any, digits: int = 60) -> tuple[Fraction, Fraction]:
    """A rational interval guaranteed to contain x."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x), Fraction(x)
    if isinstance(x, float):
        return Fraction(x), Fraction(x)
    if isinstance(x, QuadraticSurd):
        return x.interval(digits)
    if isinstance(x, mpmath.mpf):
        # taken as accurate to the working precision, widened by 256 ulps
        man, exp = x.man_exp
        exact = Fraction(int(man)) * Fraction(2) ** int(exp)
        ulp = Fraction(2) ** (int(mpmath.frexp(x)[1]) - mpmath.mp.prec + 8)
        return exact - ulp, exact + ulp
    if isinstance(x, tuple) and len(x) == 2:
        return Fraction(x[0]), Fraction(x[1])
    raise TypeError(f"cannot interpret {type(x).__name__} as a real")


def continued_fraction(x: Any, n: int) -> list:
    """Partial quotients a_1 .. a_n of x in (0, 1).

    Rationals and quadratic surds are expanded exactly (rationals stop at
    their last digit).  Anything else is enclosed in a rational interval and
    a digit is emitted only when both ends agree; otherwise the list ends
    with ``TRUNCATED``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        if not 0 < x < 1:
            raise ValueError("x must lie in (0, 1)")
        return _rational_digits(x, n)
    if isinstance(x, QuadraticSurd):
        if x.floor() != 0:
            raise ValueError("x must lie in (0, 1)")
        return _surd_digits(x, n)
    lo, hi = to_interval(x)
    if not (0 < lo and hi < 1):
        raise ValueError("x must lie in (0, 1)")
    return _interval_digits(lo, hi, n)


def convergents(digits: list[int]) -> list[Fraction]:
    """p_k/q_k for the digit list of some x in (0, 1), starting from a_1."""
    out = []
    p0, q0, p1, q1 = 1, 0, 0, 1
    for a in digits:
        if a is TRUNCATED:
            break
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append(Fraction(p1, q1))
    return out


def semiconvergents(digits: list[int]) -> list[Fraction]:
    """Convergents and the intermediate fractions between them."""
    out = []
    p0, q0, p1, q1 = 1, 0, 0, 1
    for a in digits:
        if a is TRUNCATED:
            break
        for j in range(1, a):
            out.append(Fraction(j * p1 + p0, j * q1 + q0))
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append(Fraction(p1, q1))
    return out


@dataclass
class BAWitness:
    """Certificate that x stays s-far from every horoball in the checked range."""

    point: Any
    s: Any
    verified_range: dict
    margins: list = field(default_factory=list)
    counterexamples: list = field(default_factory=list)
    certified: bool = True

    @property
    def passed(self) -> bool:
        return not self.counterexamples and self.certified

    @property
    def min_margin(self):
        return min((m for _, m in self.margins), default=None)

    def record(self) -> dict:
        return {"point": str(self.point), "s": str(self.s), "range": self.verified_range,
                "min_margin": None if self.min_margin is None else str(self.min_margin),
                "counterexamples": [str(c) for c in self.counterexamples],
                "passed": self.passed}


def _margin_bounds(lo: Fraction, hi: Fraction, r: Fraction) -> tuple[Fraction, Fraction]:
    q2 = r.denominator ** 2
    if lo <= r <= hi:
        near = Fraction(0)
    else:
        near = min(abs(lo - r), abs(hi - r))
    far = max(abs(lo - r), abs(hi - r))
    return q2 * near, q2 * far


def verify_ba_ford(x: Any, s, qmax: int, qmin_scale=None,
                   keep: Optional[Callable[[int], bool]] = None) -> BAWitness:
    """Check q^2 |x - p/q| > s for reduced p/q in [0, 1] with q <= qmax.

    For s < 1/2 a violation satisfies |x - p/q| < 1/(2q^2), so p/q is a
    convergent of x and only convergents are scanned.  Otherwise each q gets
    its nearest numerators.  ``qmin_scale`` (a radius rho) limits the range
    further to q with 1/q^2 >= rho; ``keep`` restricts to a sub-family by
    denominator.
    """
    if qmin_scale is not None:
        qmax = min(qmax, isqrt(int(1 / Fraction(qmin_scale))))
    lo, hi = to_interval(x)
    if lo < 0 or hi > 1:
        raise ValueError("x must lie in [0, 1]")
    s = Fraction(s)
    cands = None
    method = "per-q"
    if s < Fraction(1, 2):
        cands = _convergent_candidates(lo, hi, qmax)
        method = "convergents"
    if cands is None:
        cands = []
        for q in range(1, qmax + 1):
            for p in {math.floor(lo * q), math.floor(lo * q) + 1,
                      math.floor(hi * q), math.floor(hi * q) + 1}:
                if 0 <= p <= q and math.gcd(p, q) == 1:
                    cands.append(Fraction(p, q))
        if method == "convergents":
            method = "per-q"
    w = BAWitness(point=x, s=s, verified_range={"qmax": qmax, "method": method})
    for r in sorted(set(cands), key=lambda f: (f.denominator, f.numerator)):
        if r.denominator > qmax or not 0 <= r <= 1:
            continue
        if keep is not None and not keep(r.denominator):
            continue
        near, far = _margin_bounds(lo, hi, r)
        w.margins.append((r, near))
        if far <= s:
            w.counterexamples.append(r)
        elif near <= s:
            # the enclosure straddles the threshold
            w.certified = False
    return w


def iter_convergents(x: Fraction, qmax: int) -> Iterator[Fraction]:
    """Convergents of a rational x in [0, 1] with denominator at most qmax."""
    p0, q0, p1, q1 = 1, 0, math.floor(x), 1
    yield Fraction(p1, q1)
    rem = x - p1
    while rem:
        rem = 1 / rem
        a = math.floor(rem)
        rem -= a
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > qmax:
            return
        yield Fraction(p1, q1)


def _convergent_candidates(lo: Fraction, hi: Fraction, qmax: int) -> Optional[list[Fraction]]:
    """Convergents with q <= qmax shared by every point of [lo, hi].

    Returns None when the expansions of the two ends disagree below qmax,
    since points in between may then have other convergents.
    """
    a = list(iter_convergents(lo, qmax))
    if hi != lo:
        b = list(iter_convergents(hi, qmax))
        if a != b:
            return None
    return [Fraction(0), Fraction(1)] + a


def ba_margin_bruteforce(x: Fraction, qmax: int) -> tuple[Fraction, Fraction]:
    """min q^2 |x - p/q| over all p/q in [0, 1] with q <= qmax, and the minimizer."""
    best = None
    for q in range(1, qmax + 1):
        for p in range(q + 1):
            m = q * q * abs(x - Fraction(p, q))
            if best is None or m < best[0]:
                best = (m, Fraction(p, q))
    return best


def parse_real(text: str, dps: int = 60):
    """Parse "p/q" or a decimal exactly; other expressions become a rational enclosure.

    Expressions may use sqrt, pi, e, log and exp, and are evaluated with
    mpmath at ``dps`` digits.
    """
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        pass
    with mpmath.workdps(dps):
        env = {"sqrt": mpmath.sqrt, "pi": mpmath.pi, "e": mpmath.e, "log": mpmath.log,
               "exp": mpmath.exp, "__builtins__": {}}
        value = eval(text, env)  # noqa: S307 - restricted namespace for CLI input
        return to_interval(mpmath.mpf(value))
