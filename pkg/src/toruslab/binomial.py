"""Binomial models and the decreasing-rearrangement machinery.

X counts how many of m independent events of probability p occur.  Its
decreasing rearrangement X* on [0, 1) takes the value l on
[alpha_{l+1}, alpha_l), where alpha_l = P(X >= l), and H(t) is the running
integral of X*.  Exact rationals are used whenever p is rational.  The
scans, where p = C_q / m^(1/q) is irrational, use float tails from
scipy.stats.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import stirling2
from scipy.stats import binom

from .errors import ParamOrder, PreconditionViolated, ValidationError
from .exact import as_fraction

GOLDEN = (1 + math.sqrt(5)) / 2


def _check_model(m: int, p: Fraction):
    if m < 0:
        raise ValidationError("m must be nonnegative")
    if not 0 <= p <= 1:
        raise ValidationError(f"p = {p} outside [0, 1]")


@dataclass(frozen=True)
class BinomialModel:
    m: int
    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", as_fraction(self.p))
        _check_model(self.m, self.p)

    def pmf(self) -> List[Fraction]:
        return pmf(self.m, self.p)

    def alphas(self) -> List[Fraction]:
        return alphas(self.m, self.p)

    def H(self) -> "HProfile":
        return H_function(self.m, self.p)


def pmf(m: int, p) -> List[Fraction]:
    """[P(X = i) for i = 0..m]."""
    p = as_fraction(p)
    _check_model(m, p)
    q = 1 - p
    return [comb(m, i) * p ** i * q ** (m - i) for i in range(m + 1)]


def alphas(m: int, p) -> List[Fraction]:
    """[alpha_0, ..., alpha_{m+1}] with alpha_l = P(X >= l)."""
    probs = pmf(m, p)
    out = [Fraction(0)] * (m + 2)
    for l in range(m, -1, -1):
        out[l] = out[l + 1] + probs[l]
    return out


def alpha(m: int, p, l: int) -> Fraction:
    if not 0 <= l <= m + 1:
        raise ValidationError(f"l = {l} outside 0..{m + 1}")
    return alphas(m, p)[l]


def feller_tail(m: int, p, k: int) -> Fraction:
    """m C(m-1, k) * integral_0^p t^k (1-t)^(m-k-1) dt, integrated term by term."""
    p = as_fraction(p)
    _check_model(m, p)
    if not 0 <= k < m:
        raise ValidationError(f"k = {k} outside 0..{m - 1}")
    n = m - k - 1
    total = Fraction(0)
    for i in range(n + 1):
        e = k + i + 1
        total += (-1) ** i * comb(n, i) * p ** e / e
    return m * comb(m - 1, k) * total


class HProfile:
    """H(t) = integral_0^t X*(s) ds, exact and piecewise linear.

    Slope l on [alpha_{l+1}, alpha_l); the pieces run from slope m near 0
    down to slope 0 near 1."""

    def __init__(self, m: int, p):
        self.m = m
        self.p = as_fraction(p)
        self.alphas = alphas(m, self.p)
        # values at the breakpoints: H(alpha_l) = l alpha_l + sum_{k > l} alpha_k
        vals = [Fraction(0)] * (m + 2)
        tail = Fraction(0)
        for l in range(m + 1, -1, -1):
            vals[l] = l * self.alphas[l] + tail
            tail += self.alphas[l]
        self.at_alpha = vals
        self._inc = [self.alphas[l] for l in range(m + 1, -1, -1)]

    def slope_at(self, t) -> int:
        """Right derivative of H at t in [0, 1)."""
        t = as_fraction(t)
        if not 0 <= t < 1:
            raise ValidationError("slope_at needs t in [0, 1)")
        # largest l with alpha_l > t
        l = 0
        while l + 1 <= self.m and self.alphas[l + 1] > t:
            l += 1
        return l

    def __call__(self, t) -> Fraction:
        t = as_fraction(t)
        if not 0 <= t <= 1:
            raise ValidationError("H is defined on [0, 1]")
        if t == 1:
            return self.at_alpha[0]
        l = self.slope_at(t)
        return self.at_alpha[l + 1] + l * (t - self.alphas[l + 1])

    def breakpoints(self) -> List[Fraction]:
        return sorted(set(self.alphas))

    def pieces(self):
        """(l, lo, hi) for every nondegenerate piece, increasing in t."""
        out = []
        for l in range(self.m, -1, -1):
            lo, hi = self.alphas[l + 1], self.alphas[l]
            if lo < hi:
                out.append((l, lo, hi))
        return out


def H_function(m: int, p) -> HProfile:
    return HProfile(m, p)


@dataclass
class RearrangementReport:
    m: int
    p: Fraction
    t: Fraction
    H_t: Fraction
    greedy: Fraction
    best_random: Fraction
    trials: int
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.greedy == self.H_t


def _greedy_fill(levels: Sequence[int], sizes: Sequence[Fraction], t: Fraction) -> Fraction:
    total = Fraction(0)
    left = t
    for lv in levels:
        take = min(left, sizes[lv])
        total += lv * take
        left -= take
        if left == 0:
            break
    return total


def rearrangement_sup_check(m: int, p, t, trials: int = 1000, seed: int = 0) -> RearrangementReport:
    """Random unions U of pieces of the level sets {X = i} with |U| = t never beat H(t)."""
    p, t = as_fraction(p), as_fraction(t)
    if not 0 < t <= 1:
        raise ValidationError("t must lie in (0, 1]")
    sizes = pmf(m, p)
    H = H_function(m, p)
    Ht = H(t)
    greedy = _greedy_fill(list(range(m, -1, -1)), sizes, t)
    rng = random.Random(seed)
    best = Fraction(0)
    bad = 0
    for _ in range(trials):
        # random partial amounts first, then top up in a random order
        order = list(range(m + 1))
        rng.shuffle(order)
        take = [Fraction(0)] * (m + 1)
        left = t
        for lv in order:
            frac = Fraction(rng.randrange(0, 17), 16)
            amt = min(left, sizes[lv] * frac)
            take[lv] = amt
            left -= amt
        rng.shuffle(order)
        for lv in order:
            if left == 0:
                break
            amt = min(left, sizes[lv] - take[lv])
            take[lv] += amt
            left -= amt
        val = sum((lv * a for lv, a in enumerate(take)), Fraction(0))
        best = max(best, val)
        if val > Ht:
            bad += 1
    return RearrangementReport(m, p, t, Ht, greedy, best, trials, bad)


def dominance_check(m: int, eps, p) -> bool:
    """alpha(m, eps, l) <= alpha(m, p, l) for every l."""
    eps, p = as_fraction(eps), as_fraction(p)
    if eps > p:
        raise ParamOrder(f"eps = {eps} exceeds p = {p}")
    a, b = alphas(m, eps), alphas(m, p)
    return all(x <= y for x, y in zip(a, b))


# float scans -----------------------------------------------------------------

def scan_p(m: int, q: float, C_q: float) -> float:
    return min(1.0, C_q / m ** (1.0 / q))


def float_alphas(m: int, p: float) -> np.ndarray:
    """[alpha_0, ..., alpha_{m+1}] in floats via the binomial survival function."""
    ls = np.arange(0, m + 2)
    out = binom.sf(ls - 1, m, p)
    out[0] = 1.0
    out[m + 1] = 0.0
    return out


def _float_H_at_alpha(a: np.ndarray) -> np.ndarray:
    m = len(a) - 2
    tails = np.concatenate([np.cumsum(a[::-1])[::-1][1:], [0.0]])
    # tails[l] = sum_{k > l} alpha_k
    return np.arange(m + 2) * a + tails


@dataclass
class FsupResult:
    m: int
    p: float
    value: float
    argmax: float


def F_sup(m: int, q: float, C_q: float) -> FsupResult:
    """sup over t of H(t) / (t^(1/q) m^(1-1/q)) for p = min(1, C_q / m^(1/q)).

    F is (a + l t) t^(-1/q) on the piece of slope l, with a >= 0; its only
    critical point a / (l (q-1)) is a minimum, so the sup is attained at a
    breakpoint.  The critical points are evaluated anyway as a guard."""
    if q <= 1:
        raise ValidationError("F_sup needs q > 1")
    if m < 1:
        raise ValidationError("F_sup needs m >= 1")
    p = scan_p(m, q, C_q)
    a = float_alphas(m, p)
    Ha = _float_H_at_alpha(a)
    scale = m ** (1 - 1 / q)
    best, arg = 0.0, 1.0
    for l in range(0, m + 1):
        t = a[l]
        if t > 0:
            v = Ha[l] / (t ** (1 / q) * scale)
            if v > best:
                best, arg = v, float(t)
    for l in range(1, m + 1):
        lo, hi = a[l + 1], a[l]
        if not lo < hi:
            continue
        c = Ha[l + 1] - l * lo
        tstar = c / (l * (q - 1))
        if lo < tstar < hi:
            v = (c + l * tstar) / (tstar ** (1 / q) * scale)
            if v > best:
                best, arg = v, float(tstar)
    return FsupResult(m, p, float(best), arg)


def fsup_trivial_bound(m: int, q: float, C_q: float) -> float:
    """m^(1/q) p^(1-1/q) from H(t) <= min(m t, m p)."""
    p = scan_p(m, q, C_q)
    return m ** (1 / q) * p ** (1 - 1 / q)


def sum_alpha_power(m: int, q: float, C_q: float, start: int = 0) -> float:
    """sum_{l >= start} alpha_l^(1-1/q)."""
    a = float_alphas(m, scan_p(m, q, C_q))[start:m + 1]
    return float(np.sum(a ** (1 - 1 / q)))


@dataclass
class FmIdentity:
    m: int
    q: float
    integral: float
    alpha_sum: float
    zero_term: float

    @property
    def rel_error(self) -> float:
        return abs(self.integral - self.alpha_sum) / abs(self.alpha_sum)


def fm_identity(m: int, q: float, C_q: float = 1.0) -> FmIdentity:
    """Both sides of integral_0^1 H'(s) s^(-1/q) m^(-(1-1/q)) ds = q/(q-1) m^(-(1-1/q)) sum_{l>=1} alpha_l^(1-1/q).

    The left side integrates every linear piece of H in closed form; the
    right side is the plain tail sum.  `zero_term` is what an l = 0 term
    would add to the right side."""
    p = scan_p(m, q, C_q)
    a = float_alphas(m, p)
    e = 1 - 1 / q
    c = q / (q - 1) / m ** e
    integral = 0.0
    for l in range(1, m + 1):
        integral += l * (a[l] ** e - a[l + 1] ** e)
    integral *= c
    rhs = c * float(np.sum(a[1:m + 1] ** e))
    return FmIdentity(m, q, integral, rhs, c * a[0] ** e)


def m0(q: float, C_q: float) -> int:
    """Smallest m with C_q / m^(1/q) <= 1 and C_q m^(1-1/q) >= 1."""
    if q <= 1 or C_q <= 0:
        raise ValidationError("m0 needs q > 1 and C_q > 0")
    m = 1
    while not (C_q / m ** (1 / q) <= 1 and C_q * m ** (1 - 1 / q) >= 1):
        m += 1
    return m


def _floor(x: float) -> int:
    # guard against float roots landing just below an exact integer
    return math.floor(x * (1 + 1e-12))


def chebyshev_terms(m: int, q: float, C_q: float) -> int:
    """Last index of the outer sum, floor(sqrt(m^(1+1/q) / C_q))."""
    return _floor(math.sqrt(m ** (1 + 1 / q) / C_q))


@dataclass
class ChebyshevBound:
    m: int
    q: float
    lhs: float
    rhs: float
    terms: int

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs


def chebyshev_sum_bound(m: int, q: float, C_q: float) -> ChebyshevBound:
    """lhs = sum_{l=0}^m alpha_l^(1-1/q) against the second-moment bound."""
    if q < GOLDEN:
        raise PreconditionViolated(f"q = {q} below the golden ratio")
    lo = m0(q, C_q)
    if m < lo:
        raise PreconditionViolated(f"m = {m} below m0 = {lo}")
    lhs = sum_alpha_power(m, q, C_q, start=0)
    s = C_q * m ** (1 - 1 / q)
    N = chebyshev_terms(m, q, C_q)
    inner = math.fsum(n ** (-2 + 2 / q) for n in range(1, N + 1))
    rhs = 3 * s + 2 * math.sqrt(s) * inner
    return ChebyshevBound(m, q, lhs, rhs, N)


def binomial_moment_coeffs(m: int, R: int) -> List[int]:
    """Integer coefficients c_i with E[X^R] = sum_i c_i p^i (falling factorials times Stirling numbers)."""
    out = [0] * (R + 1)
    for i in range(0, min(R, m) + 1):
        falling = math.perm(m, i)
        out[i] = int(stirling2(R, i, exact=True)) * falling
    return out


def binomial_moment(m: int, p, R: int):
    """E[X^R]; exact when p is a Fraction, float otherwise."""
    coeffs = binomial_moment_coeffs(m, R)
    if isinstance(p, float):
        return math.fsum(c * p ** i for i, c in enumerate(coeffs))
    p = as_fraction(p)
    return sum((c * p ** i for i, c in enumerate(coeffs)), Fraction(0))


def moment_route_bound(m: int, q: float, R: int, C_q: float = 1.0, *, check: bool = True) -> float:
    """(E[X^R])^(1/R) / m^(1-1/q) for p = min(1, C_q / m^(1/q))."""
    if check:
        if not 1 < q < GOLDEN:
            raise PreconditionViolated(f"q = {q} outside (1, golden ratio)")
        if not R - R / q > 1:
            raise PreconditionViolated(f"R = {R} does not satisfy R - R/q > 1")
        if m < R:
            raise PreconditionViolated(f"m = {m} below R = {R}")
        if not R / (C_q * m ** (1 - 1 / q)) < math.e:
            raise PreconditionViolated(f"m = {m} too small for R/(C_q m^(1-1/q)) < e")
    p = scan_p(m, q, C_q) if C_q > 0 else 0.0
    mom = binomial_moment(m, float(p), R)
    return mom ** (1 / R) / m ** (1 - 1 / q)


def moment_route_admissible(m: int, q: float, R: int, C_q: float = 1.0) -> bool:
    try:
        moment_route_bound(m, q, R, C_q)
    except PreconditionViolated:
        return False
    return True


@dataclass
class ScanRow:
    m: int
    p: float
    F_sup: float
    sum_alpha_power: float
    cheb_rhs: Optional[float]


def fsup_scan(ms: Sequence[int], q: float, C_q: float) -> List[ScanRow]:
    rows = []
    for m in ms:
        f = F_sup(m, q, C_q)
        s = sum_alpha_power(m, q, C_q, start=0)
        rhs = None
        if q >= GOLDEN and m >= m0(q, C_q):
            rhs = chebyshev_sum_bound(m, q, C_q).rhs
        rows.append(ScanRow(m, f.p, f.value, s, rhs))
    return rows
