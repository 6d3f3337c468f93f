import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from toruslab.basis import CubeSpec
from toruslab.configurations import blowup_quotient_closed, build_sequence
from toruslab.errors import InvalidN, RangeEmpty
from toruslab.exact import PowerProduct
from toruslab.maximal import BasisSpec
from toruslab.simple import StepFactor, WeightFn, tensor_weight
from toruslab.weights import (
    CubeFamily,
    a1_constant,
    ap_constant,
    comparability_fit,
    default_family,
    dyadic_family,
    fw_ainfty_estimate,
    rh_constant,
    sharp_rh_check,
    sharp_rh_constant,
    shifted_level_family,
    weighted_blowup,
)

TWO = StepFactor.two_valued(F(1, 2), 3, 1)
W1 = tensor_weight([TWO])
ROOT = CubeFamily([CubeSpec(0, ())])


def test_ap_two_valued_against_optimizer():
    res = optimize.minimize_scalar(lambda s: -(1 + 2 * s) * (1 - 2 * s / 3), bounds=(0, 1), method="bounded")
    assert -res.fun == pytest.approx(4 / 3, abs=1e-9)
    assert ap_constant(W1, 2, shifted_level_family(1, 8)) == F(4, 3)


def test_ap_tensor_product():
    w = tensor_weight([TWO, TWO])
    fam = CubeFamily([CubeSpec(2, (F(a, 8), F(b, 8))) for a in range(8) for b in range(8)])
    assert ap_constant(w, 2, fam) == F(16, 9)


def test_flat_weight_constants():
    flat = WeightFn.flat(F(7, 3))
    fam = default_family(4, 8)
    assert ap_constant(flat, 2, fam) == 1
    assert ap_constant(flat, 3, fam) == pytest.approx(1.0, rel=1e-14)
    assert rh_constant(flat, F(3, 2), fam) == pytest.approx(1.0, rel=1e-14)
    assert a1_constant(flat, dyadic_family(3)) == 1
    assert fw_ainfty_estimate(flat, dyadic_family(3)) == 1


def test_rh_on_the_root():
    assert rh_constant(W1, 2, ROOT) == pytest.approx(math.sqrt(5) / 2, rel=1e-14)
    fam = default_family(6, 8)
    assert rh_constant(W1, 3, fam) >= rh_constant(W1, 2, fam)


def test_a1_and_fw_on_dyadic_basis():
    assert a1_constant(W1) == 2
    assert fw_ainfty_estimate(W1, ROOT) == F(5, 4)
    fam = CubeFamily(list(dyadic_family(3)) + list(shifted_level_family(1, 8)))
    assert fw_ainfty_estimate(W1, fam) <= a1_constant(W1, fam)


def test_cylindrical_a1_below_one_dimensional_value():
    # in one dimension the dyadic A_1 constant of the factor is 2 as well
    assert a1_constant(tensor_weight([TWO]), None, BasisSpec()) <= 2


def test_comparability_fit():
    fit = comparability_fit(W1, dyadic_family(4), deltas=[1])
    assert fit.C >= F(3, 2) and fit.verify()
    flat = comparability_fit(WeightFn.flat(), dyadic_family(3))
    assert flat.C == 1 and flat.delta == 1 and flat.N == 2


def test_sharp_rh():
    assert sharp_rh_constant(F(5, 4), F(5)) is None
    rep = sharp_rh_check(W1, dyadic_family(5), r_grid=(F(11, 10), F(2), F(6)), fw_family=dyadic_family(3))
    assert rep.ainfty == F(5, 4) and rep.r_max == pytest.approx(5)
    assert rep.violations == 0
    assert [row.constant is None for row in rep.rows] == [False, False, True]
    with pytest.raises(RangeEmpty):
        sharp_rh_check(W1, dyadic_family(3), r_grid=(F(6),), fw_family=dyadic_family(3), strict=True)


def test_flat_weighted_row_by_hand():
    plan = build_sequence("thm1.6", {"C": 1, "delta": 1, "l": 2}, [1])
    (row,) = weighted_blowup(plan, WeightFn.flat(), 1)
    assert row.N == 2 and row.min_exit_ratio == F(1, 2)
    assert row.bound == pytest.approx(1 / 8)
    assert row.chain_ok and row.bound_ok


def test_weight_constant_on_plan_boxes_matches_unweighted():
    plan = build_sequence("thm1.6", {"C": 1, "delta": 1}, range(1, 9))
    rows = weighted_blowup(plan, W1, 1)
    for e, r in zip(plan.entries, rows):
        assert r.realized == blowup_quotient_closed(e.configuration(), "chi_Q", 1)


def test_insufficient_N():
    plan = build_sequence("thm1.6", {"C": 1, "delta": 1}, [1, 2])
    with pytest.raises(InvalidN):
        weighted_blowup(plan, WeightFn.flat(), 1, C=3, delta=1)


cuts = st.integers(1, 7).map(lambda k: F(k, 8))
vals = st.integers(1, 6)


@given(cuts, vals, vals)
def test_constants_are_at_least_one_and_fw_below_a1(cut, a, b):
    w = tensor_weight([StepFactor.two_valued(cut, a, b)])
    fam = CubeFamily(list(dyadic_family(3)) + list(shifted_level_family(1, 8)))
    assert ap_constant(w, 2, fam) >= 1
    assert rh_constant(w, 2, fam) >= 1 - 1e-12
    assert fw_ainfty_estimate(w, fam) <= a1_constant(w, fam)


@given(cuts, vals, vals)
def test_fit_covers_its_samples(cut, a, b):
    w = tensor_weight([StepFactor.two_valued(cut, a, b)])
    fit = comparability_fit(w, dyadic_family(3))
    assert fit.verify()
    assert PowerProduct(fit.C, [(fit.N, -fit.delta)]) < 1
