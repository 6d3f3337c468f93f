import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from toruslab import binomial as B
from toruslab.errors import ParamOrder, PreconditionViolated

probs = st.fractions(0, 1).map(lambda x: x.limit_denominator(12))


def test_alpha_examples():
    assert B.alpha(2, F(1, 2), 1) == F(3, 4)
    assert B.alpha(2, F(1, 2), 2) == F(1, 4)
    assert B.feller_tail(2, F(1, 2), 0) == F(3, 4)
    assert B.feller_tail(3, F(1, 4), 1) == B.alpha(3, F(1, 4), 2) == F(10, 64)


def test_feller_tail_against_symbolic_integral():
    t = sp.symbols("t")
    for m, p, k in ((5, F(1, 3), 2), (7, F(2, 5), 0), (6, F(1, 2), 5)):
        expr = (m - k) * sp.binomial(m, k) * sp.integrate(t ** k * (1 - t) ** (m - k - 1), (t, 0, sp.Rational(p.numerator, p.denominator)))
        assert B.feller_tail(m, p, k) == F(str(sp.nsimplify(expr)))


@given(st.integers(1, 40), probs)
def test_pmf_and_tails_against_scipy(m, p):
    pm = B.pmf(m, p)
    assert sum(pm) == 1
    np.testing.assert_allclose([float(x) for x in pm], stats.binom.pmf(range(m + 1), m, float(p)), atol=1e-12)
    a = B.alphas(m, p)
    np.testing.assert_allclose([float(a[l]) for l in range(1, m + 1)],
                               stats.binom.sf(np.arange(0, m), m, float(p)), atol=1e-12)


def test_H_examples():
    H = B.H_function(2, F(1, 2))
    assert H(F(1, 4)) == F(1, 2)
    assert H(F(3, 4)) == 1
    assert H(1) == 1


@given(st.integers(1, 25), probs)
def test_H_is_concave_with_mean_at_one(m, p):
    H = B.H_function(m, p)
    assert H(1) == m * p
    slopes = [l for l, _, _ in H.pieces()]
    assert slopes == sorted(slopes, reverse=True)


@pytest.mark.parametrize("m,p,t", [(2, F(1, 2), F(1, 4)), (4, F(1, 3), F(1, 5)), (6, F(2, 7), F(3, 10))])
def test_rearrangement(m, p, t):
    rep = B.rearrangement_sup_check(m, p, t, trials=1000)
    assert rep.ok and rep.greedy == B.H_function(m, p)(t)


def test_dominance():
    assert B.dominance_check(3, F(1, 4), F(1, 2))
    with pytest.raises(ParamOrder):
        B.dominance_check(3, F(1, 2), F(1, 4))


@given(st.integers(1, 30), probs, probs)
def test_dominance_property(m, a, b):
    lo, hi = sorted((a, b))
    assert B.dominance_check(m, lo, hi)


def _fsup_dense(m, q, cq, n):
    """H on a dense t-grid from scipy tails: H(t) = sum_l min(t, alpha_l)."""
    p = B.scan_p(m, q, cq)
    a = stats.binom.sf(np.arange(0, m), m, p)
    ts = np.linspace(1e-9, 1, n)
    H = np.minimum(ts[:, None], a[None, :]).sum(axis=1)
    return ts, H


@pytest.mark.parametrize("m", [1, 2, 3, 5, 8])
def test_fsup_against_dense_grid(m):
    ts, H = _fsup_dense(m, 2.0, 1.0, 4001)
    dense = np.max(H / (np.sqrt(ts) * m ** 0.5))
    res = B.F_sup(m, 2.0, 1.0)
    assert dense <= res.value * (1 + 1e-6)
    assert res.value - dense <= 5e-3


@given(st.integers(1, 300), st.sampled_from([1.3, 2.0, 3.0]), st.sampled_from([0.5, 1.0, 2.0]))
def test_fsup_below_trivial_bound(m, q, cq):
    assert B.F_sup(m, q, cq).value <= B.fsup_trivial_bound(m, q, cq) * (1 + 1e-12)


def test_fsup_single_coordinate():
    assert B.F_sup(1, 2.0, 1.0).value <= 1
    assert B.F_sup(1, 2.0, 3.0).value <= 1


@pytest.mark.parametrize("m,q", [(4, 1.3), (33, 2.0), (100, 3.0), (7, B.GOLDEN)])
def test_fm_integral_by_quadrature(m, q):
    res = B.fm_identity(m, q)
    p = B.scan_p(m, q, 1.0)
    H = B.H_function(m, F(p).limit_denominator(10 ** 15))
    total = 0.0
    for l, lo, hi in H.pieces():
        if l:
            total += l * integrate.quad(lambda s: s ** (-1 / q), float(lo), float(hi), epsabs=1e-14, epsrel=1e-12)[0]
    total /= m ** (1 - 1 / q)
    assert total == pytest.approx(res.alpha_sum, rel=1e-8)
    assert res.rel_error <= 1e-9


def test_chebyshev_examples():
    assert B.chebyshev_terms(16, 2.0, 1.0) == 8
    m0 = B.m0(2.0, 1.0)
    assert B.chebyshev_sum_bound(m0, 2.0, 1.0).ok
    with pytest.raises(PreconditionViolated):
        B.chebyshev_sum_bound(100, 1.5, 1.0)
    if m0 > 1:
        with pytest.raises(PreconditionViolated):
            B.chebyshev_sum_bound(m0 - 1, 2.0, 1.0)


@given(st.integers(1, 30), probs, st.integers(1, 6))
def test_moments_against_direct_sum(m, p, R):
    exact = B.binomial_moment(m, p, R)
    direct = sum(k ** R * math.comb(m, k) * p ** k * (1 - p) ** (m - k) for k in range(m + 1))
    assert exact == direct
    if 0 < p < 1:
        assert float(exact) == pytest.approx(stats.binom.moment(R, m, float(p)), rel=1e-9)


def test_first_moment_route_is_cq():
    for m in (16, 64, 1024):
        assert B.moment_route_bound(m, 2.0, 1, 1.0, check=False) == pytest.approx(1.0, rel=1e-12)


def test_moment_route_bounded_on_dyadic_scan():
    vals = [B.moment_route_bound(2 ** k, 1.5, 4) for k in range(2, 13)]
    assert all(math.isfinite(v) for v in vals)
    assert max(vals) < 2
