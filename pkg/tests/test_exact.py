import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toruslab.exact import PowerProduct, floor_power, integer_floor_root, rational_above, rational_below, rational_power
from toruslab.errors import IrrationalPower

pos = st.fractions(F(1, 50), 50)
exps = st.fractions(-3, 3).map(lambda x: x.limit_denominator(6))


@given(pos, exps, pos, exps)
def test_comparison_agrees_with_logs(a, e, b, g):
    x, y = PowerProduct.power(a, e), PowerProduct.power(b, g)
    lx, ly = e * math.log(a), g * math.log(b)
    if abs(lx - ly) > 1e-9:
        assert (x < y) == (lx < ly)


def test_exact_equality_of_irrational_products():
    assert PowerProduct.power(2, F(1, 2)) * PowerProduct.power(8, F(1, 2)) == 4
    assert PowerProduct.power(2, F(1, 3)) ** 3 == 2
    assert PowerProduct.power(3, F(1, 2)) > F(173, 100)
    assert PowerProduct.power(3, F(1, 2)) < F(1733, 1000)


def test_rational_power():
    assert rational_power(F(4, 9), F(3, 2)) == F(8, 27)
    with pytest.raises(IrrationalPower):
        rational_power(2, F(1, 2))


@given(st.integers(0, 10 ** 12), st.integers(1, 5))
def test_integer_floor_root(n, k):
    r = integer_floor_root(n, k)
    assert r ** k <= n < (r + 1) ** k


def test_floor_power():
    assert floor_power(16, F(3, 2)) == 64
    assert floor_power(2, F(1, 2)) == 1


@given(pos, exps)
def test_rational_brackets(a, e):
    x = PowerProduct.power(a, e)
    lo, hi = rational_below(x), rational_above(x)
    assert lo <= x <= hi
    assert float(hi - lo) <= 1e-11 * max(1, float(x))
