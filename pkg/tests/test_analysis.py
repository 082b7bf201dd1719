import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bagame.analysis import (
    CantorCylinders,
    DigitCylinders,
    FunctionOracle,
    InsufficientDepth,
    ba_digit_set_oracle,
    box_dimension,
    cantor_ball_measure,
    cantor_dimension,
    cantor_function,
    cantor_set_oracle,
    dimension_of_ba_digits,
    fit_slope,
    lebesgue_ball_measure,
    power_law_check,
)
from bagame.diophantine import GOLDEN

CANTOR_DIM = math.log(2) / math.log(3)


@pytest.mark.parametrize("x, value", [
    (Fraction(0), Fraction(0)),
    (Fraction(1), Fraction(1)),
    (Fraction(1, 3), Fraction(1, 2)),
    (Fraction(1, 2), Fraction(1, 2)),
    (Fraction(2, 3), Fraction(1, 2)),
    (Fraction(1, 4), Fraction(1, 3)),
    (Fraction(3, 4), Fraction(2, 3)),
    (Fraction(1, 10), Fraction(1, 5)),
    (Fraction(2, 9), Fraction(1, 4)),
])
def test_cantor_function_values(x, value):
    assert cantor_function(x) == value


@given(st.fractions(min_value=0, max_value=1, max_denominator=500))
def test_cantor_function_symmetry(x):
    assert cantor_function(1 - x) == 1 - cantor_function(x)
    assert cantor_function(x / 3) == cantor_function(x) / 2


@given(st.fractions(min_value=0, max_value=1, max_denominator=300),
       st.fractions(min_value=0, max_value=1, max_denominator=300))
def test_cantor_function_monotone(x, y):
    if x <= y:
        assert cantor_function(x) <= cantor_function(y)


def test_cantor_ball_measure():
    assert cantor_ball_measure(0, Fraction(1, 3)) == Fraction(1, 2)
    assert cantor_ball_measure(Fraction(1, 2), Fraction(1, 7)) == 0


def test_cantor_power_law_holds_at_its_dimension():
    pts = [Fraction(int(w, 3), 3 ** 5) for w in ("00000", "02020", "20002", "22222", "02200")]
    scales = [Fraction(1, 3 ** k) for k in range(1, 8)]
    rep = power_law_check(cantor_ball_measure, CANTOR_DIM, scales, pts, c_max=4)
    assert rep.passed and not rep.diverging
    assert rep.C <= 2


def test_lebesgue_power_law_constant_is_two():
    scales = [Fraction(1, 2 ** k) for k in range(2, 8)]
    rep = power_law_check(lebesgue_ball_measure, 1.0, scales, [Fraction(0), Fraction(1, 2)])
    assert rep.C == pytest.approx(2.0)
    assert rep.passed


def test_zero_measure_balls_are_rejected():
    rep = power_law_check(cantor_ball_measure, CANTOR_DIM, [Fraction(1, 9)], [Fraction(1, 2), Fraction(0)])
    assert rep.rejected == [(Fraction(1, 2), Fraction(1, 9), "zero-measure ball")]


def test_wrong_exponent_does_not_pass():
    pts = [Fraction(0), Fraction(2, 9)]
    scales = [Fraction(1, 3 ** k) for k in range(1, 11)]
    rep = power_law_check(cantor_ball_measure, 0.5, scales, pts)
    assert not rep.passed and rep.diverging
    # growth is (2 / 3^delta)^9 across these ten scales
    assert rep.growth == pytest.approx((2 / 3 ** 0.5) ** 9, rel=1e-9)


def test_interval_has_dimension_one():
    oracle = FunctionOracle(lambda lo, hi: lo < 1 and hi > 0, "[0, 1]")
    est = box_dimension(oracle, range(2, 10))
    assert est.counts == [2 ** k for k in range(2, 10)]
    assert est.slope == pytest.approx(1.0)


def test_finite_set_has_dimension_zero():
    pts = [Fraction(0), Fraction(1, 3), Fraction(1, 2)]
    oracle = FunctionOracle(lambda lo, hi: any(lo <= p < hi for p in pts))
    est = box_dimension(oracle, range(2, 10))
    assert est.counts[-1] == 3
    assert est.slope == pytest.approx(0.0, abs=1e-9)


def test_box_dimension_needs_three_fitted_scales():
    with pytest.raises(ValueError):
        box_dimension(cantor_set_oracle(), [3, 4, 5, 6], base=3, drop=2)


def test_refine_and_fast_counts_agree():
    fast = cantor_dimension(range(2, 9), method="fast")
    slow = cantor_dimension(range(2, 9), method="refine")
    # each cylinder's right end opens one more half-open box, except at 1
    assert fast.counts == slow.counts == [2 ** (k + 1) - 1 for k in range(2, 9)]
    assert fast.slope == pytest.approx(CANTOR_DIM, abs=0.01)


def test_digit_refine_and_fast_counts_agree():
    oracle = ba_digit_set_oracle(2)
    fast = box_dimension(oracle, range(3, 10), method="fast")
    slow = box_dimension(oracle, range(3, 10), method="refine")
    assert fast.counts == slow.counts


def test_digit_sets_are_nested():
    for N in (2, 3, 4):
        small, big = ba_digit_set_oracle(N), ba_digit_set_oracle(N + 1)
        m = 2 ** 8
        for j in range(m):
            lo, hi = Fraction(j, m), Fraction(j + 1, m)
            if small.meets(lo, hi):
                assert big.meets(lo, hi)


def test_digit_oracle_examples():
    oracle = ba_digit_set_oracle(2)
    g = float(GOLDEN)
    assert oracle.meets(Fraction(g - 1e-6), Fraction(g + 1e-6))
    # numbers starting with a partial quotient of 3 lie in (1/4, 1/3]
    assert not oracle.meets(Fraction(28, 100), Fraction(30, 100))


@pytest.mark.parametrize("system", [CantorCylinders(), DigitCylinders(3)])
def test_children_sit_inside_parent(system):
    def ends(node):
        lo, hi = system.hull(node)
        return float(getattr(lo, "value", lo)), float(getattr(hi, "value", hi))

    frontier = [system.root()]
    for _ in range(3):
        nxt = []
        for node in frontier:
            plo, phi = ends(node)
            kids = sorted((ends(c) for c in system.children(node)))
            for lo, hi in kids:
                assert plo - 1e-15 <= lo < hi <= phi + 1e-15
            for (_, h), (l, _) in zip(kids, kids[1:]):
                assert h <= l
            nxt += system.children(node)
        frontier = nxt


def test_insufficient_depth():
    with pytest.raises(InsufficientDepth):
        cantor_set_oracle(depth=3).count_boxes(3, 8)


def test_counts_are_monotone():
    est = dimension_of_ba_digits(3, exponents=range(4, 12))
    assert all(a <= b for a, b in zip(est.counts, est.counts[1:]))
    assert est.meta["N"] == 3


def test_digit_dimension_needs_two_digits():
    with pytest.raises(ValueError):
        dimension_of_ba_digits(1)


def test_fit_slope_exact_line():
    slope, hw = fit_slope([1, 2, 3, 4], [2, 4, 8, 16], 2)
    assert slope == pytest.approx(1.0)
    assert hw == pytest.approx(0.0, abs=1e-9)


def test_estimate_csv():
    est = cantor_dimension(range(2, 7))
    assert est.csv().splitlines()[:2] == ["scale,count", "3^-2,7"]
