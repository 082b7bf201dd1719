"""Command-line driver.  Every command writes JSON Lines to stdout, starting with a config echo.

Exit codes: 0 success, 2 a player forfeited or moved illegally, 3 a check
failed (counterexample, failed certificate), 1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .analysis import (
    cantor_ball_measure,
    cantor_dimension,
    dimension_of_ba_digits,
    lebesgue_ball_measure,
    power_law_check,
)
from .diophantine import TRUNCATED, continued_fraction, parse_real, verify_ba_ford
from .games import IntervalBob
from .horoballs import FamilyError, generate_ford, load_family, rescale_family
from .metric import (
    Ball,
    CantorPlayfield,
    cantor_points,
    cantor_space,
    certify_diffuse,
    diffuse_bound_from_perfectness,
    hyperbolic_boundary,
    measure_perfectness,
    playfield_for,
)
from .records import load_space, write_records
from .strategy import ExperimentParams, run_ba_experiment

EXIT_OK, EXIT_ERROR, EXIT_FORFEIT, EXIT_CHECK = 0, 1, 2, 3


def _range(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",")]


def _emit(records) -> None:
    write_records(records, sys.stdout)


def _bob(spec: str, opening: Ball):
    kind, _, arg = spec.partition(":")
    if kind == "random":
        return IntervalBob(opening, seed=int(arg or 0))
    if kind == "cusp":
        return IntervalBob(opening, target=Fraction(arg or "1/2"))
    if kind == "greedy":
        return IntervalBob(opening, seed=int(arg or 0), greedy=True)
    raise ValueError(f"unknown bob spec {spec!r} (random:SEED, cusp:X, greedy)")


def cmd_play(args) -> int:
    if args.family:
        fam = load_family(args.family)
    else:
        fam = generate_ford(args.ford)
    if args.rescale is not None:
        fam = rescale_family(fam, Fraction(args.rescale))
    beta = Fraction(args.beta)
    x, rho = (Fraction(v) for v in args.opening.split(","))
    space = hyperbolic_boundary()
    opening = Ball(x, rho, space)
    config = {"command": "play", "family": fam.generation, "members": len(fam), "beta": beta,
              "rounds": args.rounds, "bob": args.bob, "opening": [x, rho], "a": "e",
              "delta": space.delta, "visual_C": space.visual_C}
    _emit([{"config": config}])
    try:
        t, w = run_ba_experiment(fam, ExperimentParams(beta, space), _bob(args.bob, opening), args.rounds)
    except RuntimeError as e:
        _emit([{"error": str(e)}])
        return EXIT_FORFEIT
    _emit(t.records())
    ford = None
    if not args.family:
        ford = verify_ba_ford(t.outcome.center, t.meta["s"], args.ford, qmin_scale=t.outcome.radius)
    _emit([{"witness": w.record(), "ford_check": None if ford is None else ford.record(),
            "s": t.meta["s"], "outcome": t.outcome}])
    ok = w.passed and (ford is None or ford.passed)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_verify_ba(args) -> int:
    x = parse_real(args.x)
    config = {"command": "verify-ba", "x": args.x, "s": args.s, "qmax": args.qmax}
    _emit([{"config": config}])
    w = verify_ba_ford(x, Fraction(args.s), args.qmax)
    digits = None
    try:
        digits = [("..." if d is TRUNCATED else d) for d in continued_fraction(x, args.digits)]
    except ValueError:
        pass
    _emit([{"witness": w.record(), "continued_fraction": digits}])
    return EXIT_OK if w.passed else EXIT_CHECK


def cmd_dimension(args) -> int:
    exps = _range(args.depths)
    if args.cantor:
        est = cantor_dimension(exps)
    else:
        est = dimension_of_ba_digits(args.digits, exps)
    print(f"# config: command=dimension set={'cantor' if args.cantor else 'digits<=' + str(args.digits)}"
          f" depths={args.depths} base={est.base}")
    sys.stdout.write(est.csv())
    _emit([{"estimate": est.record()}])
    return EXIT_OK


def cmd_check_diffuse(args) -> int:
    space = load_space(args.config) if args.config else cantor_space(depth=args.depth)
    field = playfield_for(space)
    scales = [Fraction(1, 3 ** k) for k in _range(args.scales)]
    config = {"command": "check-diffuse", "space": space.kind, "scales": args.scales}
    nu = bound = None
    if isinstance(field, CantorPlayfield):
        nu = measure_perfectness(field, min(scales), max(scales))
        bound = diffuse_bound_from_perfectness(nu)
        config.update(nu=nu, beta_bound=bound)
    beta = Fraction(args.beta) if args.beta else (bound * Fraction(7, 8) if bound else Fraction(1, 10))
    config["beta"] = beta
    _emit([{"config": config}])
    pts = field.cylinder_left_endpoints() if isinstance(field, CantorPlayfield) else None
    cert = certify_diffuse(field, beta, scales, points=pts)
    if args.verbose:
        _emit(cert.records())
    _emit([{"summary": {"tested": len(cert.triples) + len(cert.failures),
                        "failures": len(cert.failures), "passed": cert.passed}}])
    return EXIT_OK if cert.passed else EXIT_CHECK


def cmd_power_law(args) -> int:
    delta = args.delta if args.delta is not None else math.log(2) / math.log(3)
    if args.measure == "cantor":
        scales = [Fraction(1, 3 ** k) for k in _range(args.scales)]
        pts = cantor_points(Fraction(1, 3), args.depth)
        measure = cantor_ball_measure
    else:
        scales = [Fraction(1, 2 ** k) for k in _range(args.scales)]
        pts = [Fraction(j, 2 ** args.depth) for j in range(2 ** args.depth + 1)]
        measure = lebesgue_ball_measure
    _emit([{"config": {"command": "power-law", "measure": args.measure, "delta": delta,
                       "scales": args.scales, "sample_depth": args.depth}}])
    rep = power_law_check(measure, delta, scales, pts, c_max=args.c_max)
    _emit([{"report": rep.record()}])
    return EXIT_OK if rep.passed else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bagame", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("play", help="run the horoball-avoidance strategy against a Bob")
    src = q.add_mutually_exclusive_group()
    src.add_argument("--ford", type=int, default=50, help="Ford family with q <= Q")
    src.add_argument("--family", help="family file of base=p/q diameter=r/s records")
    q.add_argument("--rescale", help="shrink every shadow by this factor")
    q.add_argument("--beta", default="1/10")
    q.add_argument("--rounds", type=int, default=60)
    q.add_argument("--bob", default="random:0", help="random:SEED, cusp:X or greedy")
    q.add_argument("--opening", default="1/2,1/2", help="x,rho of Bob's first ball")
    q.set_defaults(func=cmd_play)

    q = sub.add_parser("verify-ba", help="check q^2 |x - p/q| > s for q <= qmax")
    q.add_argument("x", help="p/q, a decimal, or an expression like (sqrt(5)-1)/2")
    q.add_argument("--s", required=True)
    q.add_argument("--qmax", type=int, default=1000)
    q.add_argument("--digits", type=int, default=20, help="partial quotients to print")
    q.set_defaults(func=cmd_verify_ba)

    q = sub.add_parser("dimension", help="box-counting dimension of a bounded-digit set")
    q.add_argument("--digits", type=int, default=2)
    q.add_argument("--depths", default="6..14", help="scale exponents a..b")
    q.add_argument("--cantor", action="store_true", help="middle-thirds Cantor control (base 3)")
    q.set_defaults(func=cmd_dimension)

    q = sub.add_parser("check-diffuse", help="certify diffuseness of a space")
    q.add_argument("--config", help="space config file; default middle-thirds Cantor")
    q.add_argument("--depth", type=int, default=10)
    q.add_argument("--beta")
    q.add_argument("--scales", default="2..8", help="exponents k of scales 3^-k")
    q.add_argument("--verbose", action="store_true", help="one record per tested triple")
    q.set_defaults(func=cmd_check_diffuse)

    q = sub.add_parser("power-law", help="power-law check for an exact self-similar measure")
    q.add_argument("--measure", choices=["cantor", "lebesgue"], default="cantor")
    q.add_argument("--delta", type=float)
    q.add_argument("--scales", default="1..10")
    q.add_argument("--depth", type=int, default=10, help="sample point depth")
    q.add_argument("--c-max", type=float, dest="c_max")
    q.set_defaults(func=cmd_power_law)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FamilyError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
