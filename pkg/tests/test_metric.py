import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bagame.metric import (
    Ball,
    CantorPlayfield,
    IntervalPlayfield,
    SpaceError,
    TreePlayfield,
    cantor_member,
    cantor_points,
    cantor_space,
    certify_diffuse,
    check_uniform_perfectness,
    diffuse_bound_from_perfectness,
    diffuse_witness,
    distance,
    hyperbolic_boundary,
    is_schmidt_nested,
    measure_perfectness,
    real_window,
    tree_boundary,
    witness_is_valid,
)

R = real_window(-10, 10)
fracs = st.fractions(min_value=-4, max_value=4, max_denominator=64)
radii = st.fractions(min_value=Fraction(1, 64), max_value=4, max_denominator=64)


def test_distance_real_window():
    assert distance(real_window(0, 1), Fraction(1, 4), Fraction(3, 4)) == Fraction(1, 2)


def test_distance_tree_prefix():
    sp = tree_boundary(2, 4)
    assert distance(sp, "0110", "0101") == pytest.approx(math.exp(-2))


def test_distance_cantor_endpoints():
    assert distance(cantor_space(), Fraction(0), Fraction(1)) == 1


def test_distance_rejects_foreign_points():
    with pytest.raises(SpaceError):
        distance(tree_boundary(2, 4), "0110", Fraction(1, 2))
    with pytest.raises(SpaceError):
        distance(tree_boundary(2, 4), "012", "0110")


@pytest.mark.parametrize("kw", [
    dict(kind="real-window", lo=1, hi=0),
    dict(kind="cantor", nu=Fraction(3, 5)),
    dict(kind="tree-boundary", branching=1),
    dict(kind="hyperbolic-boundary", visual_C=1.0),
    dict(kind="real-window", visual_a=1.0),
])
def test_space_invariants(kw):
    from bagame.metric import SpaceDescriptor

    with pytest.raises(ValueError):
        SpaceDescriptor(**{k: (Fraction(v) if k in ("lo", "hi") else v) for k, v in kw.items()})


def test_schmidt_nesting_examples():
    outer = Ball(Fraction(0), Fraction(1))
    assert is_schmidt_nested(Ball(Fraction(1, 2), Fraction(1, 2)), outer)
    assert not is_schmidt_nested(Ball(Fraction(3, 5), Fraction(1, 2)), outer)
    assert is_schmidt_nested(outer, outer)


def test_ball_needs_positive_radius():
    with pytest.raises(ValueError):
        Ball(Fraction(0), Fraction(0))


@given(fracs, radii, fracs, radii, fracs, radii)
def test_nesting_is_transitive(a, r, b, s, c, u):
    x, y, z = Ball(a, r, R), Ball(b, s, R), Ball(c, u, R)
    if is_schmidt_nested(x, y) and is_schmidt_nested(y, z):
        assert is_schmidt_nested(x, z)


@given(fracs, radii, fracs, radii)
def test_nesting_is_antisymmetric(a, r, b, s):
    x, y = Ball(a, r, R), Ball(b, s, R)
    if is_schmidt_nested(x, y) and is_schmidt_nested(y, x):
        assert (a, r) == (b, s)


@given(fracs, radii, fracs, radii)
def test_nesting_implies_containment(a, r, b, s):
    inner, outer = Ball(a, r, R), Ball(b, s, R)
    if is_schmidt_nested(inner, outer):
        for p in (a - r, a + r, a):
            assert outer.contains(p)


@given(st.integers(2, 3), st.data())
def test_nesting_implies_containment_on_trees(b, data):
    sp = tree_boundary(b, 5, visual_a=b)
    word = st.text(alphabet="".join(map(str, range(b))), min_size=5, max_size=5)
    x, y = data.draw(word), data.draw(word)
    r = Fraction(1, b ** data.draw(st.integers(0, 5)))
    s = Fraction(1, b ** data.draw(st.integers(0, 5)))
    inner, outer = Ball(x, r, sp), Ball(y, s, sp)
    if is_schmidt_nested(inner, outer):
        assert all(outer.contains(p) for p in TreePlayfield(sp).points_in(x, r))


@given(st.integers(2, 3), st.data())
def test_tree_distance_is_ultrametric(b, data):
    sp = tree_boundary(b, 6)
    word = st.text(alphabet="".join(map(str, range(b))), min_size=6, max_size=6)
    x, y, z = data.draw(word), data.draw(word), data.draw(word)
    assert distance(sp, x, z) <= max(distance(sp, x, y), distance(sp, y, z))


@given(fracs, fracs, fracs)
def test_real_distance_is_a_metric(a, b, c):
    assert distance(R, a, b) == distance(R, b, a) >= 0
    assert (distance(R, a, b) == 0) == (a == b)
    assert distance(R, a, c) <= distance(R, a, b) + distance(R, b, c)


@pytest.mark.parametrize("nu, expected", [
    (Fraction(1, 2), Fraction(1, 16)),
    (Fraction(1, 3), Fraction(1, 36)),
])
def test_diffuse_bound_formula(nu, expected):
    assert diffuse_bound_from_perfectness(nu) == expected


def test_diffuse_bound_near_one_uses_first_term():
    nu = Fraction(999, 1000)
    assert diffuse_bound_from_perfectness(nu) == 1 - nu


@pytest.mark.parametrize("nu", [0, 1, Fraction(3, 2)])
def test_diffuse_bound_domain(nu):
    with pytest.raises(ValueError):
        diffuse_bound_from_perfectness(nu)


def test_witness_unit_interval(unit_window):
    x, rho, beta = Fraction(1, 2), Fraction(1, 10), Fraction(1, 10)
    w = diffuse_witness(unit_window, x, rho, x, beta)
    assert w == Fraction(11, 20)
    # both certifying inequalities, checked by hand
    assert abs(w - x) + beta * rho <= rho
    assert abs(w - x) > 2 * beta * rho


def test_witness_far_obstacle_is_concentric(unit_window):
    x = Fraction(1, 2)
    assert diffuse_witness(unit_window, x, Fraction(1, 10), Fraction(5), Fraction(1, 10)) == x


def test_witness_cantor_prefers_02_cylinder():
    field = CantorPlayfield(cantor_space(depth=6))
    w = diffuse_witness(field, Fraction(0), Fraction(1, 3), Fraction(0), Fraction(1, 36))
    assert Fraction(2, 9) <= w <= Fraction(1, 3)
    assert witness_is_valid(field.space, Fraction(0), Fraction(1, 3), Fraction(0), Fraction(1, 36), w)


def test_witness_cantor_matches_exhaustive_search():
    field = CantorPlayfield(cantor_space(depth=6))
    x, rho, beta = Fraction(0), Fraction(1, 3), Fraction(1, 36)
    valid = [p for p in cantor_points(depth=6)
             if abs(p - x) + beta * rho <= rho and abs(p) > 2 * beta * rho]
    assert valid
    assert diffuse_witness(field, x, rho, x, beta) in valid


def test_witness_none_when_impossible():
    # a two-point set cannot dodge an obstacle sitting on the only other point
    sp = cantor_space(Fraction(1, 2), 1)
    field = CantorPlayfield(sp)
    assert diffuse_witness(field, Fraction(0), Fraction(1, 4), Fraction(0), Fraction(1, 4)) is None


def test_cantor_perfectness_quarter():
    field = CantorPlayfield(cantor_space(depth=10))
    scales = [Fraction(1, 2 ** k) for k in range(1, 13) if Fraction(1, 2 ** k) >= Fraction(1, 3 ** 8)]
    rep = check_uniform_perfectness(field, Fraction(1, 4), scales)
    assert rep.passed
    assert len(rep.witnesses) > 0


def test_single_point_perfectness_is_vacuous():
    from bagame.metric import SortedPointSet

    sp = real_window(0, 1)
    field = SortedPointSet([Fraction(1, 2)], sp)
    rep = check_uniform_perfectness(field, Fraction(1, 2), [Fraction(1, 4), Fraction(1, 8)])
    assert rep.passed and not rep.witnesses and rep.vacuous


def test_interval_perfectness_witness():
    field = IntervalPlayfield(real_window(0, 1))
    rep = check_uniform_perfectness(field, Fraction(9, 10), [Fraction(1, 2)], points=[Fraction(0)])
    assert (Fraction(0), Fraction(1, 2), Fraction(1, 2)) in rep.witnesses


def test_perfectness_needs_scales(unit_window):
    with pytest.raises(ValueError):
        check_uniform_perfectness(unit_window, Fraction(1, 2), [])


def test_measured_cantor_nu_is_two_fifths():
    field = CantorPlayfield(cantor_space(depth=10))
    nu = measure_perfectness(field, Fraction(1, 3 ** 8), Fraction(1, 9))
    assert nu == Fraction(2, 5)
    scales = [Fraction(1, 3 ** k) for k in range(2, 9)]
    assert check_uniform_perfectness(field, nu, scales).passed


def test_perfectness_implies_diffuseness_at_finite_resolution():
    field = CantorPlayfield(cantor_space(depth=7))
    scales = [Fraction(1, 3 ** k) for k in range(2, 6)]
    nu = measure_perfectness(field, min(scales), max(scales))
    assert check_uniform_perfectness(field, nu, scales).passed
    beta = diffuse_bound_from_perfectness(nu) * Fraction(99, 100)
    assert certify_diffuse(field, beta, scales, points=field.cylinder_left_endpoints()).passed


def test_cantor_membership_oracle():
    member = cantor_member(depth=5)
    assert member(Fraction(0)) and member(Fraction(1)) and member(Fraction(2, 9))
    assert not member(Fraction(1, 2))
    assert all(member(p) for p in cantor_points(depth=5))


def test_hyperbolic_boundary_defaults():
    sp = hyperbolic_boundary()
    assert sp.delta == pytest.approx(math.log(1 + math.sqrt(2)))
    assert sp.visual_C > 1 and sp.visual_a == math.e
