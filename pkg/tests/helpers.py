"""Random players and move injectors shared by the referee tests."""

from __future__ import annotations

import random
from fractions import Fraction

from bagame.games import ALICE, BOB, NoLegalMove, Strategy, Transcript
from bagame.metric import Ball

DEN = 256


def _rand_between(rng: random.Random, a: Fraction, b: Fraction) -> Fraction:
    """A rational in [a, b] on a grid fine enough for the radii we use."""
    if a >= b:
        return a
    return a + (b - a) * Fraction(rng.randrange(DEN + 1), DEN)


class RandomPlayer(Strategy):
    """Legal random moves on a real window for either player and either variant.

    With ``inject`` set to (round, kind) the player makes one deliberately
    illegal move of that kind at that round.
    """

    name = "random-player"

    def __init__(self, player, seed, opening=None, inject=None):
        super().__init__(player=player, seed=seed)
        self.player = player
        self.rng = random.Random(seed)
        self.opening = opening
        self.inject = inject
        self.injected = None

    def move(self, t: Transcript) -> Ball:
        p = t.params
        bad = self.inject is not None and self.inject[0] == t.round + (self.player == BOB)
        if self.player == BOB and not t.moves:
            ball = self.opening
            if bad:
                ball = _bad_opening(ball, self.inject[1], p)
                self.injected = ball
            return ball
        if self.player == ALICE:
            ball = self._alice(t)
        else:
            ball = self._bob(t)
        if bad:
            ball = _corrupt(ball, self.inject[1], t, self.player)
            self.injected = ball
        return ball

    def _alice(self, t):
        p = t.params
        b = t.last(BOB)
        if p.variant == "schmidt":
            r = p.alpha * b.radius
            room = b.radius - r
            a = max(p.field.lo, b.center - room)
            c = min(p.field.hi, b.center + room)
            return Ball(_rand_between(self.rng, a, c), r, b.space)
        r = p.beta * b.radius * Fraction(self.rng.randrange(1, 9), 8)
        c = b.center + b.radius * Fraction(self.rng.randrange(-12, 13), 8)
        return Ball(c, r, b.space)

    def _bob(self, t):
        p = t.params
        prev, a = t.last(BOB), t.last(ALICE)
        if p.variant == "schmidt":
            r = p.beta * a.radius
            room = a.radius - r
            lo = max(p.field.lo, a.center - room)
            hi = min(p.field.hi, a.center + room)
            return Ball(_rand_between(self.rng, lo, hi), r, a.space)
        f = p.beta + (Fraction(1, 2) - p.beta) * Fraction(self.rng.randrange(0, 5), 8)
        r = f * prev.radius
        room = prev.radius - r
        lo = max(p.field.lo, prev.center - room)
        hi = min(p.field.hi, prev.center + room)
        g = a.radius + r
        pieces = [(lo, min(hi, a.center - g)), (max(lo, a.center + g), hi)]
        pieces = [(u, v) for u, v in pieces if u < v]
        if not pieces:
            # shrink to the schedule minimum; beta < 1/3 leaves room for it
            r = p.beta * prev.radius
            room, g = prev.radius - r, a.radius + r
            lo = max(p.field.lo, prev.center - room)
            hi = min(p.field.hi, prev.center + room)
            pieces = [(u, v) for u, v in [(lo, min(hi, a.center - g)), (max(lo, a.center + g), hi)]
                      if u < v]
        if not pieces:
            # only when the window clips Bob's ball
            raise NoLegalMove("window leaves no room off the deletion")
        u, v = pieces[self.rng.randrange(len(pieces))]
        # stay strictly off the closed deletion
        c = _rand_between(self.rng, u, v)
        if abs(c - a.center) <= g:
            c = (u + v) / 2
        return Ball(c, r, prev.space)


def _bad_opening(ball, kind, params):
    if kind == "radius" and params.opening_max_radius is not None:
        return Ball(ball.center, params.opening_max_radius * 2, ball.space)
    return Ball(params.field.hi + 1, ball.radius, ball.space)


def _corrupt(ball, kind, t, player):
    """Turn a legal move into one that breaks a rule by construction."""
    p = t.params
    bob, alice = t.last(BOB), t.last(ALICE)
    if player == ALICE:
        if p.variant == "absolute" or kind == "radius":
            return Ball(ball.center, ball.radius * 2 if p.variant == "schmidt"
                        else p.beta * bob.radius * Fraction(9, 8), ball.space)
        # poke out of Bob's ball
        return Ball(bob.center + bob.radius - ball.radius / 2, ball.radius, ball.space)
    if kind == "radius":
        if p.variant == "schmidt":
            return Ball(ball.center, ball.radius * Fraction(7, 8), ball.space)
        return Ball(ball.center, p.beta * bob.radius * Fraction(7, 8), ball.space)
    if kind == "nesting":
        outer = alice if p.variant == "schmidt" else bob
        return Ball(outer.center + outer.radius - ball.radius / 2, ball.radius, ball.space)
    # "exclusion": sit on the deleted ball (absolute) or leave the playfield
    if p.variant == "absolute":
        return Ball(alice.center, ball.radius, ball.space)
    return Ball(p.field.lo - ball.radius * 4, ball.radius, ball.space)


KINDS = ("radius", "nesting", "exclusion")
