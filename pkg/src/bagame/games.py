"""Referees for Schmidt's game and the absolute game, plus strategy combinators.

Round structure: Bob opens with B_1; then for i = 1 .. rounds-1 Alice
answers B_i and Bob plays B_{i+1}.  The surviving region is the last Bob
ball, whose center is reported as the outcome.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from .metric import (
    Ball,
    CounterexampleError,
    Playfield,
    SpaceDescriptor,
    balls_disjoint,
    diffuse_witness,
    distance,
    is_schmidt_nested,
    product_space,
)

log = logging.getLogger(__name__)

BOB, ALICE = "bob", "alice"
ABSOLUTE_BETA_LIMIT = Fraction(1, 3)


class IllegalParams(ValueError):
    pass


class NoLegalMove(Exception):
    """Raised by a strategy that cannot find a move."""


@dataclass
class GameParams:
    variant: str
    beta: Any
    rounds: int
    field: Playfield
    alpha: Any = None
    opening_max_radius: Any = None

    def __post_init__(self):
        if self.variant not in ("schmidt", "absolute"):
            raise IllegalParams(f"unknown variant {self.variant!r}")
        if not 0 < self.beta < 1:
            raise IllegalParams("beta must lie in (0, 1)")
        if self.variant == "schmidt":
            if self.alpha is None or not 0 < self.alpha < 1:
                raise IllegalParams("Schmidt's game needs 0 < alpha < 1")
        elif self.beta >= ABSOLUTE_BETA_LIMIT:
            # with beta >= 1/3 a concentric deletion can leave Bob without a move
            raise IllegalParams("the absolute game requires beta < 1/3")
        if self.rounds < 1:
            raise IllegalParams("need at least one round")

    @property
    def space(self) -> SpaceDescriptor:
        return self.field.space


@dataclass
class Move:
    round: int
    player: str
    ball: Optional[Ball]
    verdict: str = "ok"

    @property
    def legal(self) -> bool:
        return self.verdict == "ok"


@dataclass
class Transcript:
    params: GameParams
    moves: list[Move] = field(default_factory=list)
    forfeit: Optional[str] = None
    meta: dict = field(default_factory=dict)

    def bob_balls(self) -> list[Ball]:
        return [m.ball for m in self.moves if m.player == BOB and m.legal]

    def alice_balls(self) -> list[Ball]:
        return [m.ball for m in self.moves if m.player == ALICE and m.legal]

    def last(self, player: str) -> Optional[Ball]:
        for m in reversed(self.moves):
            if m.player == player and m.legal:
                return m.ball
        return None

    @property
    def round(self) -> int:
        return sum(1 for m in self.moves if m.player == BOB and m.legal)

    @property
    def outcome(self) -> Optional[Ball]:
        return self.last(BOB)

    def records(self) -> list[dict]:
        return [{"round": m.round, "player": m.player,
                 "center": None if m.ball is None else m.ball.center,
                 "radius": None if m.ball is None else m.ball.radius,
                 "verdict": m.verdict} for m in self.moves]


class Strategy:
    """A deterministic map from a transcript prefix to the next ball."""

    name = "strategy"

    def __init__(self, **meta):
        self.meta = dict(meta)

    def move(self, transcript: Transcript) -> Optional[Ball]:
        raise NotImplementedError

    def metadata(self) -> dict:
        return {"name": self.name, **self.meta}


# --------------------------------------------------------------------------
# move validation


def _same_ratio(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) <= 1e-12 * max(abs(a), abs(b))
    return a == b


def check_opening(params: GameParams, ball: Ball) -> Optional[str]:
    if ball.center not in params.field:
        return "center off the playfield"
    if params.opening_max_radius is not None and ball.radius > params.opening_max_radius:
        return "opening radius too large"
    return None


def check_alice(params: GameParams, bob: Ball, ball: Ball) -> Optional[str]:
    if params.variant == "schmidt":
        if not _same_ratio(ball.radius, params.alpha * bob.radius):
            return "radius must equal alpha * rho"
        if ball.center not in params.field:
            return "center off the playfield"
        if not is_schmidt_nested(ball, bob):
            return "not nested in Bob's ball"
        return None
    if ball.radius > params.beta * bob.radius:
        return "deletion radius exceeds beta * R(B_i)"
    if not params.space.contains(ball.center):
        return "center outside the ambient space"
    return None


def check_bob(params: GameParams, prev_bob: Ball, alice: Ball, ball: Ball) -> Optional[str]:
    if ball.center not in params.field:
        return "center off the playfield"
    if params.variant == "schmidt":
        if not _same_ratio(ball.radius, params.beta * alice.radius):
            return "radius must equal beta * rho'"
        if not is_schmidt_nested(ball, alice):
            return "not nested in Alice's ball"
        return None
    if ball.radius < params.beta * prev_bob.radius:
        return "radius below beta * R(B_i)"
    if not is_schmidt_nested(ball, prev_bob):
        return "not inside B_i"
    if not balls_disjoint(ball, alice):
        return "meets the deleted ball A_i"
    return None


def _ask(strategy: Strategy, transcript: Transcript) -> Optional[Ball]:
    try:
        return strategy.move(transcript)
    except NoLegalMove:
        return None


def referee(params: GameParams, alice: Strategy, bob: Strategy) -> Transcript:
    """Run the game, validating each move; an illegal or missing move forfeits."""
    t = Transcript(params, meta={"alice": alice.metadata(), "bob": bob.metadata()})
    for i in range(1, params.rounds + 1):
        ball = _ask(bob, t)
        if ball is None:
            t.moves.append(Move(i, BOB, None, "forfeit: no move"))
            t.forfeit = BOB
            return t
        if i == 1:
            why = check_opening(params, ball)
        else:
            why = check_bob(params, t.last(BOB), t.last(ALICE), ball)
        if why:
            t.moves.append(Move(i, BOB, ball, f"illegal: {why}"))
            t.forfeit = BOB
            return t
        t.moves.append(Move(i, BOB, ball))
        if i == params.rounds:
            break
        ball = _ask(alice, t)
        if ball is None:
            t.moves.append(Move(i, ALICE, None, "forfeit: no move"))
            t.forfeit = ALICE
            return t
        why = check_alice(params, t.last(BOB), ball)
        if why:
            t.moves.append(Move(i, ALICE, ball, f"illegal: {why}"))
            t.forfeit = ALICE
            return t
        t.moves.append(Move(i, ALICE, ball))
    return t


# --------------------------------------------------------------------------
# independent audit


def _interval(ball: Ball):
    return ball.center - ball.radius, ball.center + ball.radius


def _inside(inner: Ball, outer: Ball, space: SpaceDescriptor) -> bool:
    if space.is_real:
        a, b = _interval(inner)
        c, d = _interval(outer)
        return c <= a and b <= d
    if space.kind == "product" and all(f.is_real for f in space.factors):
        return all(outer.center[k] - outer.radius <= inner.center[k] - inner.radius
                   and inner.center[k] + inner.radius <= outer.center[k] + outer.radius
                   for k in range(2))
    return distance(space, outer.center, inner.center) + inner.radius <= outer.radius


def _apart(u: Ball, v: Ball, space: SpaceDescriptor) -> bool:
    if space.is_real:
        a, b = _interval(u)
        c, d = _interval(v)
        return b < c or d < a
    if space.kind == "product" and all(f.is_real for f in space.factors):
        return any(u.center[k] + u.radius < v.center[k] - v.radius
                   or v.center[k] + v.radius < u.center[k] - u.radius for k in range(2))
    return distance(space, u.center, v.center) > u.radius + v.radius


def audit_move(params: GameParams, history: Sequence[Move], move: Move) -> Optional[str]:
    """Re-derive the legality of one move from the game rules alone."""
    space = params.space
    ball = move.ball
    bobs = [m.ball for m in history if m.player == BOB]
    alices = [m.ball for m in history if m.player == ALICE]
    if ball is None:
        return "missing move"
    if move.player == BOB:
        if ball.center not in params.field:
            return "center"
        if not bobs:
            if params.opening_max_radius is not None and ball.radius > params.opening_max_radius:
                return "opening radius"
            return None
        prev, a = bobs[-1], alices[-1]
        if params.variant == "schmidt":
            if ball.radius != params.beta * a.radius and not _same_ratio(ball.radius / a.radius, params.beta):
                return "schedule"
            return None if _inside(ball, a, space) else "nesting"
        if ball.radius / prev.radius < params.beta:
            return "schedule"
        if not _inside(ball, prev, space):
            return "nesting"
        return None if _apart(ball, a, space) else "exclusion"
    prev = bobs[-1]
    if params.variant == "schmidt":
        if ball.radius != params.alpha * prev.radius and not _same_ratio(ball.radius / prev.radius, params.alpha):
            return "schedule"
        if ball.center not in params.field:
            return "center"
        return None if _inside(ball, prev, space) else "nesting"
    return None if ball.radius / prev.radius <= params.beta else "schedule"


def audit_transcript(t: Transcript) -> list[str]:
    """Problems found by replaying the transcript; empty when consistent.

    Accepted moves must be legal and the move that ended a forfeited game
    must really be illegal.
    """
    problems = []
    history: list[Move] = []
    for m in t.moves:
        why = audit_move(t.params, history, m) if m.ball is not None else "missing move"
        if m.legal and why:
            problems.append(f"round {m.round} {m.player}: accepted but {why}")
        if not m.legal and m.ball is not None and not why:
            problems.append(f"round {m.round} {m.player}: rejected a legal move")
        if m.legal:
            history.append(m)
    outcome = t.outcome
    if outcome is not None:
        for b in t.bob_balls():
            if distance(t.params.space, b.center, outcome.center) > b.radius:
                problems.append("outcome escapes a Bob ball")
                break
    return problems


# --------------------------------------------------------------------------
# simple strategies


class Concentric(Strategy):
    """Replies concentrically with the radius the schedule demands."""

    name = "concentric"

    def __init__(self, player: str, opening: Ball | None = None):
        super().__init__(player=player)
        self.player = player
        self.opening = opening

    def move(self, t: Transcript) -> Ball:
        p = t.params
        if self.player == BOB:
            if not t.moves:
                return self.opening
            a = t.last(ALICE)
            prev = t.last(BOB)
            if p.variant == "schmidt":
                return Ball(a.center, p.beta * a.radius, a.space)
            return Ball(prev.center, p.beta * prev.radius, prev.space)
        b = t.last(BOB)
        if p.variant == "schmidt":
            return Ball(b.center, p.alpha * b.radius, b.space)
        return Ball(b.center, p.beta * b.radius, b.space)


def legal_centers_1d(lo, hi, x, rho, new_radius, deletion: Ball | None):
    """Allowed centers for a 1-D absolute-game reply as a list of (a, a_open, b, b_open) intervals."""
    a = max(lo, x - (rho - new_radius))
    b = min(hi, x + (rho - new_radius))
    if a > b:
        return []
    if deletion is None:
        return [(a, False, b, False)]
    g = deletion.radius + new_radius
    y = deletion.center
    out = []
    if a < y - g:
        out.append((a, False, min(b, y - g), b >= y - g))
    if b > y + g:
        out.append((max(a, y + g), a <= y + g, b, False))
    return out


def _grid_step(radius) -> Fraction:
    """Largest power of two not above radius / 1024."""
    limit = Fraction(radius) / 1024
    k = max(0, limit.denominator.bit_length() - limit.numerator.bit_length())
    g = Fraction(1, 2 ** k)
    while g > limit:
        g /= 2
    while g * 2 <= min(limit, 1):
        g *= 2
    return g


def nearest_legal_center(intervals, target, grid):
    """Grid point nearest ``target`` inside the union of intervals, or None.

    Keeping centers on a dyadic grid keeps the exact arithmetic small.
    """
    best = None
    for a, a_open, b, b_open in intervals:
        lo = math.floor(a / grid) + 1 if a_open or a % grid else a / grid
        hi = math.ceil(b / grid) - 1 if b_open or b % grid else b / grid
        if lo > hi:
            continue
        c = min(max(round(target / grid), lo), hi) * grid
        if best is None or abs(c - target) < abs(best - target):
            best = c
    return best


class IntervalBob(Strategy):
    """Bob on a window [lo, hi] with exact rational moves.

    Each round draws a radius factor and an aim point; the reply is the
    legal center nearest the aim.  The random draws per round are fixed in
    number, so a longer game with the same seed replays the same prefix.
    ``target`` replaces the random aim by a fixed point (cusp seeking);
    ``greedy`` aims at the left edge.
    """

    name = "interval-bob"

    def __init__(self, opening: Ball, seed: int = 0, target=None, greedy: bool = False,
                 factor_grid: int = 16, aim_grid: int = 64, max_factor=None):
        super().__init__(seed=seed, target=None if target is None else str(target), greedy=greedy)
        self.opening = opening
        self.seed = seed
        self.target = target
        self.greedy = greedy
        self.factor_grid = factor_grid
        self.aim_grid = aim_grid
        self.max_factor = max_factor

    def _draws(self, round_no: int):
        rng = random.Random(self.seed * 1_000_003 + round_no)
        return rng.randrange(self.factor_grid), rng.randrange(-self.aim_grid, self.aim_grid + 1)

    def move(self, t: Transcript) -> Ball:
        if not t.moves:
            return self.opening
        p = t.params
        field_ = p.field
        prev = t.last(BOB)
        a = t.last(ALICE)
        beta = Fraction(p.beta)
        jf, ja = self._draws(t.round)
        if p.variant == "schmidt":
            radius = beta * a.radius
            x = a.center
            deletion = None
            rho = a.radius
        else:
            top = self.max_factor if self.max_factor is not None else (1 - beta) / 2 * Fraction(15, 16)
            if self.target is not None:
                # as large a ball as can still clear a concentric deletion
                f = Fraction(math.floor(top * 64), 64)
            else:
                f = beta + (top - beta) * jf / self.factor_grid
                f = Fraction(math.ceil(f * 64), 64)
            radius = f * prev.radius
            x, rho, deletion = prev.center, prev.radius, a
        if self.target is not None:
            aim = self.target
        elif self.greedy:
            aim = x - rho
        else:
            aim = x + (rho - radius) * Fraction(ja, self.aim_grid)
        lo, hi = field_.lo, field_.hi
        for shrink in range(12):
            ivs = legal_centers_1d(lo, hi, x, rho, radius, deletion)
            c = nearest_legal_center(ivs, aim, _grid_step(radius))
            if c is not None and c in field_:
                return Ball(c, radius, prev.space)
            if p.variant == "schmidt":
                break
            radius = max(Fraction(math.ceil(beta * 64), 64) * prev.radius, radius * Fraction(3, 4))
        raise NoLegalMove("no legal center found")


class FiniteBob(Strategy):
    """Bob on an enumerable playfield (Cantor points, tree boundary).

    Chooses radius beta*R(B_i) (absolute) and the legal center closest to
    an aim point, which is a seeded random playfield point or a fixed target.
    """

    name = "finite-bob"

    def __init__(self, opening: Ball, seed: int = 0, target=None, radius_factor=None):
        super().__init__(seed=seed, target=target)
        self.opening = opening
        self.seed = seed
        self.target = target
        self.radius_factor = radius_factor

    def move(self, t: Transcript) -> Ball:
        if not t.moves:
            return self.opening
        p = t.params
        space = p.space
        prev, a = t.last(BOB), t.last(ALICE)
        if p.variant == "schmidt":
            radius = p.beta * a.radius
            outer, deletion = a, None
        else:
            radius = (self.radius_factor or p.beta) * prev.radius
            outer, deletion = prev, a
        cands = p.field.points_in(outer.center, outer.radius)
        rng = random.Random(self.seed * 7919 + t.round)
        aim = self.target if self.target is not None else cands[rng.randrange(len(cands))]
        # the first legal candidate in (distance to aim, point) order
        for c in sorted(cands, key=lambda c: (distance(space, aim, c), c)):
            ball = Ball(c, radius, outer.space)
            if not is_schmidt_nested(ball, outer):
                continue
            if deletion is not None and not balls_disjoint(ball, deletion):
                continue
            return ball
        raise NoLegalMove("no legal ball at this radius")


# --------------------------------------------------------------------------
# combinators


def absolute_view(t: Transcript, deletions: dict[int, Ball], beta) -> Transcript:
    """The absolute-game transcript seen by a wrapped strategy inside a Schmidt game."""
    p = t.params
    view = Transcript(GameParams("absolute", beta, p.rounds, p.field))
    bobs = t.bob_balls()
    for i, b in enumerate(bobs, start=1):
        view.moves.append(Move(i, BOB, b))
        if i in deletions and i < len(bobs):
            view.moves.append(Move(i, ALICE, deletions[i]))
    return view


class TranslatedAlice(Strategy):
    """Schmidt-game Alice built from an absolute-game Alice (alpha = beta).

    After asking the wrapped strategy for the deletion A_i = B(y_i, r_i) it
    answers with a diffuseness witness ball B(x', beta rho_i) inside B_i
    that avoids A_i.
    """

    name = "absolute-to-schmidt"

    def __init__(self, inner: Strategy, beta, field_: Playfield):
        super().__init__(inner=inner.metadata(), beta=str(beta))
        self.inner = inner
        self.beta = beta
        self.field = field_
        self.deletions: dict[int, Ball] = {}
        self.replies: dict[int, Ball] = {}

    def move(self, t: Transcript) -> Ball:
        i = t.round
        bob = t.last(BOB)
        for j in range(1, i):
            if j not in self.deletions:
                raise RuntimeError("translated strategy must be consulted every round")
        view = absolute_view(t, self.deletions, self.beta)
        deletion = self.inner.move(view)
        if deletion.radius > self.beta * bob.radius:
            deletion = Ball(deletion.center, self.beta * bob.radius, deletion.space)
        w = diffuse_witness(self.field, bob.center, bob.radius, deletion.center, self.beta,
                            obstacle_radius=deletion.radius)
        if w is None:
            raise CounterexampleError(
                f"no diffuseness witness in B({bob.center}, {bob.radius}) avoiding {deletion}")
        self.deletions[i] = deletion
        reply = Ball(w, self.beta * bob.radius, bob.space)
        self.replies[i] = reply
        return reply


def absolute_to_schmidt(s: Strategy, beta, field_: Playfield) -> TranslatedAlice:
    return TranslatedAlice(s, beta, field_)


class RoundRobin(Strategy):
    """Round i consults strategy (i - 1) mod k; oversized deletions are clamped."""

    name = "intersection"

    def __init__(self, strategies: Sequence[Strategy]):
        super().__init__(parts=[s.metadata() for s in strategies])
        if not strategies:
            raise ValueError("need at least one strategy")
        self.strategies = list(strategies)
        self.clamped: list[tuple[int, Ball]] = []
        self.owner: dict[int, int] = {}

    def move(self, t: Transcript) -> Ball:
        i = t.round
        k = (i - 1) % len(self.strategies)
        self.owner[i] = k
        ball = self.strategies[k].move(t)
        bob = t.last(BOB)
        limit = t.params.beta * bob.radius
        if ball.radius > limit:
            log.warning("clamping oversized deletion at round %d", i)
            self.clamped.append((i, ball))
            ball = Ball(ball.center, limit, ball.space)
        return ball


def intersect_strategies(strategies: Sequence[Strategy]) -> Strategy:
    if len(strategies) == 1:
        return strategies[0]
    return RoundRobin(strategies)


class NoOp(Strategy):
    """Deletes a ball far outside Bob's ball."""

    name = "no-op"

    def move(self, t: Transcript) -> Ball:
        b = t.last(BOB)
        return Ball(b.center + 3 * b.radius, t.params.beta * b.radius, b.space)


def project_transcript(t: Transcript, coord: int, field_: Playfield) -> Transcript:
    p = t.params
    proj = Transcript(GameParams(p.variant, p.beta, p.rounds, field_, alpha=p.alpha,
                                 opening_max_radius=p.opening_max_radius))
    for m in t.moves:
        ball = None if m.ball is None else Ball(m.ball.center[coord], m.ball.radius, field_.space)
        proj.moves.append(Move(m.round, m.player, ball, m.verdict))
    proj.forfeit = t.forfeit
    return proj


class ProductAlice(Strategy):
    """Plays two Schmidt strategies on the coordinates of E x E (max metric)."""

    name = "product"

    def __init__(self, first: Strategy, second: Strategy, fields: tuple[Playfield, Playfield]):
        super().__init__(first=first.metadata(), second=second.metadata())
        self.parts = (first, second)
        self.fields = fields

    def move(self, t: Transcript) -> Ball:
        replies = [s.move(project_transcript(t, k, f))
                   for k, (s, f) in enumerate(zip(self.parts, self.fields))]
        radius = min(r.radius for r in replies)
        space = product_space(self.fields[0].space, self.fields[1].space)
        return Ball((replies[0].center, replies[1].center), radius, space)


def product_strategy(sA: Strategy, sB: Strategy, fields: tuple[Playfield, Playfield]) -> ProductAlice:
    return ProductAlice(sA, sB, fields)


def diagonal_avoiding_first_move(B1: Ball, beta, field_: Playfield) -> Ball:
    """A_1 = B((x, z), beta rho) with z a witness in B(y, rho) kept 2 beta rho away from x."""
    (x, y), rho = B1.center, B1.radius
    z = diffuse_witness(field_, y, rho, x, beta)
    if z is None:
        raise CounterexampleError(f"no witness near {y} avoiding {x} at scale {rho}")
    return Ball((x, z), beta * rho, product_space(field_.space))


def diagonal_clearance(B1: Ball, A1: Ball) -> bool:
    """The inequality chain d(x, y') >= d(x, z) - d(y', z) > beta rho >= d(x, x') for A_1."""
    (x, _), _ = B1.center, B1.radius
    (x0, z) = A1.center
    r = A1.radius
    space = A1.space.factors[0]
    if x0 != x:
        return False
    return distance(space, x, z) - r > r


class ProductBob(Strategy):
    """Bob on E x E: independent interval Bobs on each coordinate, same radius."""

    name = "product-bob"

    def __init__(self, opening: Ball, seed: int = 0):
        super().__init__(seed=seed)
        self.opening = opening
        self.seed = seed

    def move(self, t: Transcript) -> Ball:
        if not t.moves:
            return self.opening
        p = t.params
        a = t.last(ALICE)
        radius = p.beta * a.radius
        room = a.radius - radius
        rng = random.Random(self.seed * 104729 + t.round)
        center = []
        for k, f in enumerate(p.field.factors):
            c = a.center[k] + room * Fraction(rng.randrange(-16, 17), 16)
            c = min(max(c, f.lo, a.center[k] - room), f.hi, a.center[k] + room)
            center.append(c)
        return Ball(tuple(center), radius, a.space)
