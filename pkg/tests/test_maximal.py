import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toruslab.acceptance import MaximalOracle, _midpoints, random_extra_cubes, random_simple_function
from toruslab.basis import CubeSpec, cube_region
from toruslab.configurations import make_config_around
from toruslab.errors import DepthCapExceeded, ZeroFunction
from toruslab.maximal import BasisSpec, maximal_function, overlap_function, stabilization_level, weak_type_quotient_q
from toruslab.simple import SimpleFunction
from toruslab.torus import Arc, Point, Region

V2 = cube_region(CubeSpec(2, (0, 0)))


def pt(*c):
    return Point(tuple(F(x) for x in c))


def test_stabilization_levels():
    # V_2 = (0,1/2)^2 already refines the breakpoints of chi_{V_2}
    assert stabilization_level(SimpleFunction.indicator(V2)) == 2
    f = SimpleFunction.indicator(Region.box(Arc(F(0), F(1, 4))))
    assert stabilization_level(f) == 3


def test_half_indicator():
    f = SimpleFunction.indicator(Region.box(Arc(F(0), F(1, 2))))
    mf = maximal_function(f, BasisSpec())
    assert mf.value_at(pt("1/4")) == 1
    assert mf.value_at(pt("3/4")) == F(1, 2)


def test_extra_cube_raises_complement_values():
    f = SimpleFunction.indicator(V2)
    extra = CubeSpec(2, (F(1, 4), 0))
    mf = maximal_function(f, BasisSpec(True, (extra,)))
    oracle = MaximalOracle(f, BasisSpec(True, (extra,)))
    assert mf.value_at(pt("5/8", "1/8")) == F(1, 2)
    assert mf.value_at(pt("7/8", "1/8")) == F(1, 4)
    for x in _midpoints(2, 8):
        assert mf.value_at(x) == oracle(x)


def test_quotient_of_v2_indicator():
    f = SimpleFunction.indicator(V2)
    assert weak_type_quotient_q(f, 1, BasisSpec()) >= 1
    with pytest.raises(ZeroFunction):
        weak_type_quotient_q(SimpleFunction.constant(0), 1, BasisSpec())


def test_overlap_of_configuration_with_anchor():
    Q = CubeSpec(2, (0, 0))
    c = make_config_around(Q, F(1, 2), 2)
    ov = overlap_function(list(c.cubes) + [Q])
    assert max(ov.values()) == 3


def test_depth_cap():
    deep = SimpleFunction.indicator(Region.box(*[Arc(F(0), F(1, 2))] * 7))
    with pytest.raises(DepthCapExceeded):
        maximal_function(deep, BasisSpec())


@given(st.integers(0, 10 ** 6))
def test_matches_oracle_on_random_functions(seed):
    rng = random.Random(seed)
    f = random_simple_function(rng, max_depth=2)
    extra = random_extra_cubes(rng, rng.randint(0, 3), max_level=4)
    basis = BasisSpec(True, tuple(extra))
    mf = maximal_function(f, basis)
    oracle = MaximalOracle(f, basis, max_level=8)
    depth = max([f.depth] + [c.nonfree for c in extra])
    for x in _midpoints(depth, 8):
        assert mf.value_at(x) == oracle(x)


@given(st.integers(0, 10 ** 6))
def test_dominates_function_and_is_monotone_in_basis(seed):
    rng = random.Random(seed)
    f = random_simple_function(rng, max_depth=2)
    extra = tuple(random_extra_cubes(rng, 2, max_level=4))
    m0 = maximal_function(f, BasisSpec())
    m1 = maximal_function(f, BasisSpec(True, extra))
    m2 = maximal_function(f.scale(3), BasisSpec())
    for x in _midpoints(max(f.depth, 2), 8):
        assert m0.value_at(x) >= abs(f.value_at(x))
        assert m1.value_at(x) >= m0.value_at(x)
        assert m2.value_at(x) == 3 * m0.value_at(x)
