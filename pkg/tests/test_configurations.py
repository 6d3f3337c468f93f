import random
from fractions import Fraction as F
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toruslab.basis import CubeSpec, cube_region, nonfree_count
from toruslab.configurations import (
    SequencePlan,
    anchor_level,
    blowup_quotient_closed,
    build_sequence,
    chi_q_bound_power,
    configuration_region,
    eps2_bound_power,
    inclusion_partition,
    intersection_bound,
    make_config_around,
    minimal_N,
    plan_parameters,
    test_function as make_test_function,
    validate_config,
)
from toruslab.errors import EpsilonOutOfRange, InvalidN, TooManyCubes, ValidationError
from toruslab.exact import PowerProduct
from toruslab.maximal import BasisSpec, weak_type_quotient_q
from toruslab.torus import region_intersect

V2 = CubeSpec(2, (0, 0))


def test_shifts_around_v2():
    c = make_config_around(V2, F(1, 2), 2)
    assert [q.translation for q in c.cubes] == [(F(1, 4), 0), (0, F(1, 4))]
    for q in c.cubes:
        assert region_intersect(cube_region(q), cube_region(V2)).measure() == F(1, 8)


def test_wrapping_configuration_is_valid():
    Q = CubeSpec(7, (F(7, 8), F(3, 4), F(3, 4)))
    c = make_config_around(Q, F(1, 4), 3)
    assert validate_config(c).valid


def test_parameter_errors():
    with pytest.raises(EpsilonOutOfRange):
        make_config_around(V2, F(3, 4), 1)
    with pytest.raises(TooManyCubes):
        make_config_around(V2, F(1, 2), 3)


def test_inclusion_partition_single_shift():
    c = make_config_around(CubeSpec(1, (0,)), F(1, 2), 1)
    assert inclusion_partition(c) == [(0, F(1, 4)), (1, F(1, 4))]


@pytest.mark.parametrize("eps", [F(1, 4), F(1, 2), F(1, 3)])
def test_inclusion_partition_is_binomial(eps):
    Q = CubeSpec(5, (0, 0, 0))
    parts = inclusion_partition(make_config_around(Q, eps, 3))
    expected = [comb(3, k) * eps ** k * (1 - eps) ** (3 - k) * Q.measure() for k in range(4)]
    assert [m for _, m in parts] == expected


def test_closed_form_examples():
    c = make_config_around(V2, F(1, 2), 2)
    assert blowup_quotient_closed(c, "chi_Q", 1) == 1
    assert chi_q_bound_power(F(1, 2), 2, 1) == F(1, 4)
    assert blowup_quotient_closed(c, "chi_intersection", 1) == 2
    assert intersection_bound(2) == F(1, 2)
    c1 = make_config_around(CubeSpec(1, (0,)), F(1, 2), 1)
    assert blowup_quotient_closed(c1, "chi_A", 1) >= eps2_bound_power(F(1, 2), 1, 1) == F(1, 8)


@pytest.mark.parametrize("testfn", ["chi_Q", "chi_intersection"])
@pytest.mark.parametrize("q", [1, F(3, 2), 2])
def test_closed_form_matches_evaluator(testfn, q):
    for Q, eps, l in ((V2, F(1, 2), 2), (CubeSpec(5, (F(1, 4), 0, F(1, 2))), F(1, 4), 3), (V2, F(1, 4), 1)):
        c = make_config_around(Q, eps, l)
        f = make_test_function(c, testfn)
        own = BasisSpec(False, tuple(list(c.cubes) + [Q]))
        generic = weak_type_quotient_q(f, q, own, symbolic=True)
        assert blowup_quotient_closed(c, testfn, q) == max(PowerProduct(1), PowerProduct._lift(generic))


def test_plan_parameters():
    assert plan_parameters("cor1.3", 3, {})[:2] == (F(1, 2), 3)
    assert plan_parameters("cor1.5-closed", 4, {"q0": 2})[:2] == (F(1, 5), 16)
    plan = build_sequence("cor1.3", {}, [3])
    assert plan.entries[0].sizelevel >= 5 and nonfree_count(plan.entries[0].sizelevel) >= 3


def test_minimal_N():
    assert minimal_N(1, 1) == 2
    assert minimal_N(F(3, 2), 1) == 2
    assert minimal_N(2, F(1, 2)) == 5
    with pytest.raises(InvalidN):
        build_sequence("thm1.6", {"C": 1, "delta": 1, "N_j": 1}, [1])


def test_empty_plan_rejected():
    with pytest.raises(ValidationError):
        build_sequence("cor1.3", {}, [])


def test_plan_json_roundtrip():
    plan = build_sequence("thm1.6", {"C": F(3, 2), "delta": 1}, range(1, 6))
    again = SequencePlan.from_json(plan.to_json())
    assert again.to_json() == plan.to_json()


def test_plan_configurations_are_disjoint():
    plan = build_sequence("cor1.3", {}, range(1, 5))
    regs = [configuration_region(e.configuration()) for e in plan.entries]
    for i in range(len(regs)):
        for k in range(i + 1, len(regs)):
            assert region_intersect(regs[i], regs[k]).is_empty()


@given(st.integers(1, 4), st.integers(1, 8), st.integers(0, 10 ** 6))
def test_eps2_bound_holds(l, e, seed):
    rng = random.Random(seed)
    m = (l - 1) ** 2 + 1 + rng.randint(0, 3)
    Q = CubeSpec(m, tuple(F(rng.randrange(32), 32) for _ in range(nonfree_count(m))))
    c = make_config_around(Q, F(e, 16), l)
    for q in (1, F(3, 2), 2):
        assert PowerProduct._lift(blowup_quotient_closed(c, "chi_Q", q)) >= PowerProduct._lift(eps2_bound_power(F(e, 16), l, q))


@given(st.integers(0, 8), st.integers(1, 9))
def test_anchor_level_fits_inside_cell(L, l):
    from toruslab.basis import side_exponent

    m = anchor_level(L, l)
    assert nonfree_count(m) >= l
    assert all(side_exponent(m, i) > side_exponent(L, i) for i in range(1, nonfree_count(L) + 1))
