import math
from fractions import Fraction as F

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from toruslab.errors import NotIntegrable, TailDiverges
from toruslab.periodize import (
    LineWeight,
    PeriodizedWeight,
    check_perio_a1,
    check_perio_rh,
    default_interval_family,
    estimate_a1_real,
    line_integral,
    periodize_integral,
    periodize_integral_alt,
    staircase,
)
from toruslab.torus import Arc, Region

LOGCAP = LineWeight.logcap()


def quad(f, a, b):
    pts = [x for x in (0.0, -1.0, 1.0) if a < x < b]
    return integrate.quad(f, a, b, points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-12)[0]


@pytest.mark.parametrize("k", range(6))
def test_logcap_symmetric_mass(k):
    exact = line_integral(LOGCAP, -k - 1, k + 1, exact=True)
    assert sp.simplify(exact - (2 * k + 2 + 2 / sp.E)) == 0
    assert line_integral(LOGCAP, -k - 1, k + 1) == pytest.approx(quad(LOGCAP, -k - 1, k + 1), rel=1e-10)


@pytest.mark.parametrize("a,b", [("-3/10", "1/5"), ("1/10", "5/2"), (-3, "-1/2")])
def test_logcap_against_quadrature(a, b):
    a, b = F(a), F(b)
    assert float(line_integral(LOGCAP, a, b)) == pytest.approx(quad(LOGCAP, float(a), float(b)), rel=1e-10)


@pytest.mark.parametrize("k", range(5))
def test_power_one_unit_masses(k):
    assert line_integral(LineWeight.power(1), k, k + 1) == F(2 * k + 1, 2)


def test_power_validation():
    with pytest.raises(NotIntegrable):
        LineWeight.power(-1)
    with pytest.raises(TailDiverges):
        PeriodizedWeight(LOGCAP, 1)


def test_periodized_power_against_quadrature():
    pw = PeriodizedWeight(LineWeight.power(1), 2)
    res = periodize_integral(pw, Arc(F(0), F(1)))
    oracle = math.fsum(2.0 ** -abs(k) * quad(lambda x: abs(x + k), 0, 1) for k in range(-80, 81))
    assert float(res.value) == pytest.approx(oracle, abs=1e-6)
    assert res.error <= 1e-9 * float(res.value)


def test_periodized_logcap_on_unit_interval():
    pw = PeriodizedWeight(LOGCAP, 2)
    res = periodize_integral(pw, Arc(F(0), F(1)))
    oracle = math.fsum(2.0 ** -abs(k) * quad(LOGCAP, k, k + 1) for k in range(-80, 81))
    assert float(res.value) == pytest.approx(oracle, rel=1e-9)


@given(st.integers(0, 63), st.integers(1, 64))
def test_constant_base_gives_three_lengths(a, n):
    pw = PeriodizedWeight(LineWeight.constant(), 2)
    I = Arc(F(a, 64), F(n, 64))
    res = periodize_integral(pw, I)
    assert abs(float(3 * I.length - F(res.value))) <= res.error <= 1e-9 * 3


def test_wrap_representatives_agree():
    pw = PeriodizedWeight(LOGCAP, 2)
    I = Arc(F(7, 8), F(1, 4))
    a, b = periodize_integral(pw, I), periodize_integral_alt(pw, I)
    assert float(a.value) == pytest.approx(float(b.value), abs=1e-9)


def test_checks_on_default_family():
    pw = PeriodizedWeight(LOGCAP, 2)
    fam = default_interval_family(64)
    a1 = check_perio_a1(pw, fam)
    rh = check_perio_rh(pw, 2, fam)
    assert a1.violations == rh.violations == 0
    assert a1.wrapped > 0
    assert a1.bound == pytest.approx(4 * estimate_a1_real(LOGCAP), rel=1e-12)


def test_larger_lambda_never_violates_more():
    fam = default_interval_family(32)
    v = [check_perio_a1(PeriodizedWeight(LOGCAP, lam), fam).violations for lam in (F(3, 2), 2, 3)]
    assert v == sorted(v, reverse=True)


def test_staircase_brackets_dyadic_masses():
    pw = PeriodizedWeight(LOGCAP, 2)
    lo, hi = staircase(pw, 3)
    for s in range(4):
        n = 1 << s
        for t in range(n):
            I = Arc(F(t, n), F(1, n))
            val = periodize_integral(pw, I).value
            box = Region.box(I)
            assert lo.measure(box) <= F(val) <= hi.measure(box)
