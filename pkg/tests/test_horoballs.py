import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bagame.horoballs import (
    FamilyError,
    dump_family,
    family_from_records,
    ford_shadow_ratio,
    generate_ford,
    generate_tree_family,
    load_family,
    locate,
    locate_bruteforce,
    rescale_family,
    tree_horoballs_disjoint,
)
from bagame.hyperbolic import HPoint, TreePoint, shadow, tree_horoball
from bagame.metric import tree_boundary


def euler_phi(n):
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


def test_ford_two():
    F = generate_ford(2)
    got = {(h.base, h.euclidean_diameter) for h in F}
    assert got == {(Fraction(0), Fraction(1)), (Fraction(1), Fraction(1)),
                   (Fraction(1, 2), Fraction(1, 4))}


def test_ford_count_matches_totient_sum():
    # reduced fractions in [0, 1] with q <= 5: 1 + sum of phi(q)
    assert len(generate_ford(5)) == 11 == 1 + sum(euler_phi(q) for q in range(1, 6))
    assert len(generate_ford(30)) == 1 + sum(euler_phi(q) for q in range(1, 31))


def test_ford_rejects_zero():
    with pytest.raises(ValueError):
        generate_ford(0)


@pytest.mark.parametrize("qmax", [1, 7, 40, 100])
def test_ford_disjoint(qmax):
    cert = generate_ford(qmax).certificate
    assert cert["disjoint"] and not cert["violations"]


def test_ford_tangency_iff_unimodular():
    F = generate_ford(12)
    hs = list(F)
    for i, g in enumerate(hs):
        for h in hs[i + 1:]:
            p, q = g.base.numerator, g.base.denominator
            r, s = h.base.numerator, h.base.denominator
            tangent = (g.base - h.base) ** 2 == g.euclidean_diameter * h.euclidean_diameter
            assert tangent == (abs(p * s - r * q) == 1)


def test_overlapping_family_reports_violation():
    F = family_from_records([(Fraction(0), Fraction(1)), (Fraction(1, 4), Fraction(1, 2))])
    assert not F.certificate["disjoint"]
    assert F.certificate["violations"]


def test_locate_examples():
    F = generate_ford(10)
    assert locate(F, HPoint(Fraction(1, 2), Fraction(1, 8))).base == Fraction(1, 2)
    assert locate(F, HPoint(Fraction(1, 2), Fraction(3))) is None
    # tangency point of the circles at 0 and 1/2 lies on both boundaries
    assert locate(F, HPoint(Fraction(2, 5), Fraction(1, 5))) is None


def test_locate_infinity_on_request():
    F = generate_ford(5)
    z = HPoint(Fraction(1, 3), Fraction(2))
    assert locate(F, z) is None
    assert locate(F, z, include_infinity=True) is F.infinity


def test_locate_agrees_with_bruteforce(ford50):
    rng = random.Random(5)
    for _ in range(10_000):
        z = HPoint(Fraction(rng.randrange(0, 4096), 4096), Fraction(rng.randrange(1, 4096), 4096 * 8))
        got, want = locate(ford50, z), locate_bruteforce(ford50, z)
        assert (got and got.base) == (want and want.base)


def test_rescaled_family_is_disjoint_and_smaller():
    F = generate_ford(15)
    G = rescale_family(F, Fraction(1, 2))
    assert G.certificate["disjoint"]
    for h, g in zip(F, G):
        assert g.base == h.base
        assert float(g.shadow_radius) == pytest.approx(float(h.shadow_radius) / 2, rel=1e-9)


def test_rescaling_composes():
    F = generate_ford(8)
    once = rescale_family(F, Fraction(1, 6))
    twice = rescale_family(rescale_family(F, Fraction(1, 2)), Fraction(1, 3))
    for a, b in zip(once, twice):
        assert float(a.shadow_radius) == pytest.approx(float(b.shadow_radius), rel=1e-9)


@pytest.mark.parametrize("s", [0, 1, Fraction(3, 2)])
def test_rescaling_domain(s):
    with pytest.raises(ValueError):
        rescale_family(generate_ford(3), s)


def test_load_family_round_trip(tmp_path):
    F = generate_ford(6)
    path = tmp_path / "ford.txt"
    path.write_text("# ford circles\n\n" + dump_family(F))
    G = load_family(path)
    assert [(h.base, h.euclidean_diameter) for h in G] == [(h.base, h.euclidean_diameter) for h in F]


def test_load_empty_family(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("# nothing here\n")
    assert len(load_family(path)) == 0


def test_load_rejects_overlap(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("base=0 diameter=1\nbase=1/4 diameter=1/2\n")
    with pytest.raises(FamilyError) as err:
        load_family(path)
    assert err.value.violations


@pytest.mark.parametrize("text, lineno", [
    ("base=0 diameter=1\nbase=1/2\n", 2),
    ("base=0 diameter=1\n\nbase=x diameter=1\n", 3),
    ("oops\n", 1),
    ("base=0 diameter=-1\n", 1),
])
def test_load_reports_line_number(tmp_path, text, lineno):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(FamilyError) as err:
        load_family(path)
    assert err.value.line == lineno
    assert f"line {lineno}" in str(err.value)


def test_ford_shadow_comparable_to_inverse_square():
    lo, hi = ford_shadow_ratio(generate_ford(50))
    # R_j q^2 stays within fixed positive bounds
    assert 0.1 < lo <= hi < 2


@given(st.integers(2, 3), st.integers(1, 4), st.integers(1, 4), st.data())
def test_tree_disjointness_matches_shared_points(b, k, l, data):
    sp = tree_boundary(b, 4, visual_a=b)
    word = st.text(alphabet="".join(map(str, range(b))), min_size=4, max_size=4)
    x, y = data.draw(word), data.draw(word)
    g, h = tree_horoball(x, -k, sp), tree_horoball(y, -l, sp)
    # two meeting horoballs share a point of the geodesic x..y, so search both rays
    ray_points = [TreePoint(e, Fraction(t, 2)) for e in (x, y) for t in range(9)]
    meet = any(g.contains(p) and h.contains(p) for p in ray_points)
    assert tree_horoballs_disjoint(g, h) == (not meet)


def test_generated_tree_family_is_disjoint():
    sp = tree_boundary(3, 5, visual_a=3)
    fam = generate_tree_family(sp)
    assert len(fam) > 0
    assert fam.check_disjoint()["disjoint"]
    for h in fam:
        assert shadow(h, space=sp).radius == h.shadow_radius
