import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from oracles import exact_op
from renyi_exhaust.interval import (
    CONSTANTS,
    DIRECTED,
    ONE_ULP,
    DivisionByIntervalContainingZero,
    Interval,
    IntervalOverflow,
    NegativeBound,
    UnknownConstant,
    const_enclosure,
    enclose_alternating_tail,
    op,
)

KINDS = ("add", "sub", "mul", "div")

finite = st.floats(min_value=-1e30, max_value=1e30, allow_nan=False, allow_infinity=False)


@st.composite
def intervals(draw):
    a, b = draw(finite), draw(finite)
    return Interval(min(a, b), max(a, b))


def _corners(a: Interval, b: Interval, kind: str):
    return [exact_op(Fraction(x), Fraction(y), kind) for x in (a.lo, a.hi) for y in (b.lo, b.hi)]


def test_add_example():
    r = Interval(1, 2) + Interval(3, 4)
    assert r.lo <= 4 and r.hi >= 6


def test_sub_example():
    r = Interval(1, 2) - Interval(3, 4)
    assert r.lo <= -3 and r.hi >= -1


def test_decimal_sum_encloses_true_value():
    r = Interval.from_fraction(Fraction(1, 10)) + Interval.from_fraction(Fraction(2, 10))
    assert r.contains(Fraction(3, 10))


def test_division_by_zero_interval():
    with pytest.raises(DivisionByIntervalContainingZero):
        Interval(1, 1) / Interval(-1, 1)


def test_overflow():
    with pytest.raises(IntervalOverflow):
        Interval(1e308, 1e308) * Interval(10, 10)


def test_structural_zero_stays_exact():
    z = Interval(0.0, 0.0) * Interval(-3.7, 12.1)
    assert z.lo == 0.0 and z.hi == 0.0
    assert (Interval(0.3, 0.4) + Interval(0.0, 0.0)) == Interval(0.3, 0.4)


def test_directed_is_tightest_and_nested():
    a, b = Interval.point(0.1), Interval.point(0.7)
    for kind in KINDS:
        d = op(a, b, kind, DIRECTED)
        u = op(a, b, kind, ONE_ULP)
        assert d.subset(u)


@settings(max_examples=400, deadline=None)
@given(intervals(), intervals(), st.sampled_from(KINDS), st.sampled_from((ONE_ULP, DIRECTED)))
def test_enclosure_property(a, b, kind, mode):
    if kind == "div" and b.lo <= 0 <= b.hi:
        return
    try:
        r = op(a, b, kind, mode)
    except IntervalOverflow:
        return
    exact = _corners(a, b, kind)
    assert Fraction(r.lo) <= min(exact)
    assert max(exact) <= Fraction(r.hi)
    if mode == DIRECTED:
        # no double strictly between the bound and the exact extreme
        assert Fraction(math.nextafter(r.lo, math.inf)) > min(exact)
        assert Fraction(math.nextafter(r.hi, -math.inf)) < max(exact)


@pytest.mark.parametrize("name", CONSTANTS)
def test_constants_against_mpmath(name):
    mpmath.mp.dps = 40
    ref = {
        "log2": mpmath.log(2),
        "log_three_halves": mpmath.log(mpmath.mpf(3) / 2),
        "pi_sq_over_12": mpmath.pi**2 / 12,
        "dilog_neg_half": mpmath.polylog(2, -0.5),
        "dilog_half": mpmath.polylog(2, 0.5),
        "two_log2_minus_1": 2 * mpmath.log(2) - 1,
        "two_log2_minus_2": 2 * mpmath.log(2) - 2,
    }[name]
    iv = const_enclosure(name)
    assert mpmath.mpf(iv.lo) <= ref <= mpmath.mpf(iv.hi)
    ulp = math.ulp(abs(float(ref)))
    assert iv.hi - iv.lo <= 16 * ulp


def test_log2_enclosure_is_narrow():
    iv = const_enclosure("log2")
    assert iv.lo <= math.log(2) <= iv.hi
    assert iv.hi - iv.lo <= 2.2e-16


def test_unknown_constant():
    with pytest.raises(UnknownConstant):
        const_enclosure("euler_gamma")


def test_alternating_tail():
    bound = Interval.from_fraction(Fraction(1, 3600 * 2**60))
    t = enclose_alternating_tail(bound)
    assert t.lo == -t.hi and t.hi - t.lo < 1e-19
    with pytest.raises(NegativeBound):
        enclose_alternating_tail(Interval(-1.0, 1.0))


def test_json_roundtrip():
    iv = Interval(0.1, 0.30000000000000004)
    assert Interval.from_json(iv.to_json()) == iv


def test_even_power_of_straddling_interval():
    assert (Interval(-2.0, 1.0) ** 2).lo == 0.0
