"""Alice's horoball-avoidance strategy and the badly-approximable pipeline.

At round i Alice looks at the point of the ray toward Bob's center x_i at
time t_i = -log_a(rho_i).  If it sits inside a family member based at xi,
she deletes B(xi, beta rho_i); otherwise she deletes a fixed ball away from
Bob's.  The outcome then stays s R_j away from every base xi_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Union

import numpy as np

from .diophantine import BAWitness
from .games import BOB, GameParams, Strategy, Transcript, referee
from .horoballs import HoroballFamily, TreeHoroballFamily, locate
from .hyperbolic import (
    GeodesicRay,
    HPoint,
    I,
    TreePoint,
    geodesic_point,
    geodesic_point_at_scale,
)
from .metric import (
    Ball,
    IntervalPlayfield,
    SpaceDescriptor,
    TreePlayfield,
    distance,
    hyperbolic_boundary,
    tree_power,
)


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class StrategyConstants:
    beta: Any
    delta: float
    visual_C: float
    visual_a: float
    c: Any
    s_lower: Any
    rho1: Any
    R1: Any
    tree_mode: bool = False


def strategy_constant(beta, delta, C, a):
    """c = beta / (C 4 delta a) e^-delta; for delta = 0 (trees) the tree constant beta."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta == 0:
        return beta
    return float(beta) / (float(C) * 4 * float(delta) * float(a)) * math.exp(-float(delta))


def _halfplane_terms(beta, delta, C, a, rho1, R1) -> dict:
    c = strategy_constant(beta, delta, C, a)
    b, d, C, a = float(beta), float(delta), float(C), float(a)
    return {
        "inner": c / (2 * C) * math.exp(-d),
        "text": c / (2 * C) * math.exp(-4 * d),
        "opening": b * float(rho1) / float(R1),
        "beta_squared": b * b / (C * 4 * d * a) * math.exp(-d),
    }


def bound_terms(constants: StrategyConstants, rho1=None, R1=None) -> dict:
    rho1 = constants.rho1 if rho1 is None else rho1
    R1 = constants.R1 if R1 is None else R1
    if constants.tree_mode:
        beta = constants.beta
        return {"beta_squared": beta * beta, "opening": beta * rho1 / R1}
    return _halfplane_terms(constants.beta, constants.delta, constants.visual_C,
                            constants.visual_a, rho1, R1)


def make_constants(beta, space: SpaceDescriptor, rho1, R1) -> StrategyConstants:
    tree = space.is_tree or space.delta == 0
    delta = 0.0 if tree else space.delta
    c = strategy_constant(beta, delta, space.visual_C, space.visual_a)
    probe = StrategyConstants(beta, delta, space.visual_C, space.visual_a, c, None, rho1, R1, tree)
    s = min(bound_terms(probe).values())
    return StrategyConstants(beta, delta, space.visual_C, space.visual_a, c, s, rho1, R1, tree)


def ba_lower_bound(transcript: Transcript, constants: StrategyConstants):
    """Conservative minimum of the closed-form terms, using the transcript's opening radius."""
    bobs = transcript.bob_balls()
    rho1 = bobs[0].radius if bobs else constants.rho1
    return min(bound_terms(constants, rho1=rho1).values())


def family_R1(F: Union[HoroballFamily, TreeHoroballFamily], window=None):
    """Largest member shadow radius, clipped to the window width."""
    if len(F) == 0:
        return 1
    if isinstance(F, TreeHoroballFamily):
        return max(h.shadow_radius for h in F)
    R = getattr(F, "_max_shadow", None)
    if R is None:
        R = F._max_shadow = max(h.shadow_radius for h in F)
    if window is not None:
        R = min(R, float(window[1] - window[0]))
    return R


# --------------------------------------------------------------------------
# Alice


def tree_time(space: SpaceDescriptor, rho):
    """-log_a(rho), exact when rho is an integral power of an integral a."""
    a = space.visual_a
    t = -math.log(float(rho)) / math.log(float(a))
    k = round(t)
    if isinstance(rho, Fraction) and float(a).is_integer() and abs(t - k) < 1e-9:
        if tree_power(space, k) == rho:
            return k
    return t


def halfplane_probe(x, rho, a=math.e) -> HPoint:
    ray = GeodesicRay(x, I)
    if a == math.e and isinstance(rho, Fraction):
        return geodesic_point_at_scale(ray, rho)
    return geodesic_point(ray, -math.log(float(rho)) / math.log(a))


def canonical_deletion(bob: Ball, beta, window) -> Ball:
    """Deletion at the window corner farther from Bob's center (disjoint whenever possible)."""
    lo, hi = window
    x, rho = bob.center, bob.radius
    corner = lo if x - lo > hi - x else hi
    return Ball(corner, beta * rho, bob.space)


def canonical_tree_deletion(bob: Ball, beta, space: SpaceDescriptor) -> Ball:
    x = bob.center
    flip = str((int(x[0]) + 1) % space.branching)
    return Ball(flip + x[1:], beta * bob.radius, bob.space)


def probe_hit(bob: Ball, F, params: "AliceParams"):
    """The probe point for Bob's ball and the family member containing it (or None)."""
    x, rho = bob.center, bob.radius
    if params.space.is_tree:
        probe = TreePoint(x, tree_time(params.space, rho))
        return probe, (F.locate(probe) if len(F) else None)
    z = halfplane_probe(x, rho, params.visual_a)
    if isinstance(F, HoroballFamily) and F.infinity is not None and F.infinity.contains(z):
        raise ConfigurationError("probe entered the horoball at infinity: opening radius too large")
    return z, (locate(F, z) if len(F) else None)


def _deletion(bob: Ball, F, params: "AliceParams"):
    _, hit = probe_hit(bob, F, params)
    if hit is not None:
        return Ball(hit.base, params.beta * bob.radius, bob.space), hit
    if params.space.is_tree:
        return canonical_tree_deletion(bob, params.beta, params.space), None
    return canonical_deletion(bob, params.beta, (params.space.lo, params.space.hi)), None


def alice_move(transcript: Transcript, F, params: "AliceParams") -> Ball:
    return _deletion(transcript.last(BOB), F, params)[0]


@dataclass
class AliceParams:
    beta: Any
    space: SpaceDescriptor
    visual_a: float = math.e


class HoroballAvoidance(Strategy):
    """Absolute-game Alice that deletes the base of the horoball the probe lands in."""

    name = "horoball-avoidance"

    def __init__(self, family, params: AliceParams):
        super().__init__(family=getattr(family, "generation", "?"), beta=str(params.beta))
        self.family = family
        self.params = params
        self.hits: dict[int, Any] = {}

    def move(self, t: Transcript) -> Ball:
        ball, hit = _deletion(t.last(BOB), self.family, self.params)
        if hit is not None:
            self.hits[t.round] = hit.base
        return ball


# --------------------------------------------------------------------------
# verification


def verify_ba_family(x, s, F, r_min) -> BAWitness:
    """rho(x, xi_j) > s R_j for every member with R_j >= r_min.

    Half-plane families are screened in floating point with a guard band
    and anything near the threshold is rechecked exactly.
    """
    w = BAWitness(point=x, s=s, verified_range={"r_min": str(r_min), "members": 0})
    members = list(F)
    if not members:
        w.verified_range["members"] = "all"
        return w
    if isinstance(F, TreeHoroballFamily):
        for h in members:
            if h.shadow_radius < r_min:
                continue
            w.verified_range["members"] += 1
            d = distance(F.space, x, h.base)
            w.margins.append((h.base, d / h.shadow_radius))
            if not d > s * h.shadow_radius:
                w.counterexamples.append(h.base)
        return w
    cache = getattr(F, "_verify_arrays", None)
    if cache is None or len(cache[0]) != len(members):
        cache = (np.array([float(h.shadow_radius) for h in members]),
                 np.array([float(h.base) for h in members]))
        F._verify_arrays = cache
    R, bases = cache
    sel = np.nonzero(R >= float(r_min) * (1 - 1e-12))[0]
    w.verified_range["members"] = int(sel.size)
    if sel.size == 0:
        return w
    fx = float(x)
    ratio = np.abs(fx - bases[sel]) / R[sel]
    sf = float(s)
    for j in np.nonzero(ratio <= sf * (1 + 1e-9) + 1e-300)[0]:
        h = members[sel[j]]
        # exact recheck; R carries a relative error below 1e-15
        d = abs(Fraction(x) - h.base)
        if not d > Fraction(s) * Fraction(h.shadow_radius) * (1 + Fraction(1, 10 ** 12)):
            w.counterexamples.append(h.base)
    k = int(np.argmin(ratio))
    w.margins.append((members[sel[k]].base, float(ratio[k])))
    return w


def certified_radius(t: Transcript):
    """Radius of the last Bob ball Alice answered.

    A member whose shadow radius is below it may not have been probed yet,
    so the finite-round guarantee covers members with R_j at least this.
    """
    bobs = t.bob_balls()
    return bobs[-2].radius if len(bobs) >= 2 else math.inf


@dataclass
class ExperimentParams:
    beta: Any
    space: SpaceDescriptor = field(default_factory=hyperbolic_boundary)
    opening_max_radius: Any = Fraction(1, 2)
    visual_a: float = math.e


def run_ba_experiment(F, params: ExperimentParams, bob: Strategy, rounds: int):
    """Referee a game of HoroballAvoidance against ``bob`` and certify the outcome."""
    space = params.space
    field_ = TreePlayfield(space) if space.is_tree else IntervalPlayfield(space)
    game = GameParams("absolute", params.beta, rounds, field_,
                      opening_max_radius=None if space.is_tree else params.opening_max_radius)
    alice = HoroballAvoidance(F, AliceParams(params.beta, space, params.visual_a))
    t = referee(game, alice, bob)
    if t.forfeit:
        raise RuntimeError(f"game ended by forfeit of {t.forfeit}: {t.moves[-1].verdict}")
    window = None if space.is_tree else (space.lo, space.hi)
    R1 = family_R1(F, window)
    constants = make_constants(params.beta, space, t.bob_balls()[0].radius, R1)
    s = ba_lower_bound(t, constants)
    final = t.outcome
    witness = verify_ba_family(final.center, s, F, certified_radius(t))
    t.meta["constants"] = constants
    t.meta["s"] = s
    t.meta["alice_hits"] = dict(alice.hits)
    return t, witness


def tree_round_budget(space: SpaceDescriptor, beta, rho1) -> int:
    """Rounds for which a minimal-radius Bob can still leave a deletion at this depth.

    Escaping a deletion from B(x, rho) needs a point at distance in
    (2 beta rho, (1 - beta) rho]; distinct ends are at least a^-(depth-1) apart,
    so Bob's radius must stay above a^-(depth-1) / (1 - beta).
    """
    floor_ = tree_power(space, space.depth - 1)
    n, rho = 1, rho1
    while (1 - beta) * rho >= floor_:
        n += 1
        rho = beta * rho
    return n
