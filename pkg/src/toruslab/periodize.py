"""Weights on the real line and their periodizations onto the circle.

p(x) = sum_k a_k w(x + k) with a_k = lam^-|k|.  Interval integrals use closed
form antiderivatives of w; the discarded terms |k| > K are bounded by
explicit geometric tails, so every float comes with a certified error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import sympy as sp
from scipy import integrate, special

from .errors import NotIntegrable, TailDiverges, ValidationError
from .exact import as_fraction, rational_above
from .simple import SimpleFunction, WeightFn
from .torus import Arc, Region

INV_E = math.exp(-1.0)
KINDS = ("power", "logcap", "piecewise")
K_MAX = 4096


@dataclass(frozen=True)
class LineWeight:
    """power: |x|^alpha; logcap: max(log(1/|x|), 1); piecewise: values between breaks, `outside` beyond."""

    kind: str
    alpha: Fraction = Fraction(0)
    breaks: Tuple[Fraction, ...] = ()
    values: Tuple[Fraction, ...] = ()
    outside: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown line weight kind {self.kind!r}")
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        object.__setattr__(self, "breaks", tuple(as_fraction(b) for b in self.breaks))
        object.__setattr__(self, "values", tuple(as_fraction(v) for v in self.values))
        object.__setattr__(self, "outside", as_fraction(self.outside))
        if self.kind == "power" and self.alpha <= -1:
            raise NotIntegrable(f"|x|^{self.alpha} is not locally integrable")
        if self.kind == "piecewise":
            if len(self.breaks) != (len(self.values) + 1 if self.values else 0):
                raise ValidationError("piecewise weight needs len(breaks) = len(values) + 1")
            if any(a >= b for a, b in zip(self.breaks, self.breaks[1:])):
                raise ValidationError("breaks must increase")
            if self.outside < 0 or any(v < 0 for v in self.values):
                raise ValidationError("weights are nonnegative")

    @classmethod
    def power(cls, alpha) -> "LineWeight":
        return cls("power", alpha=alpha)

    @classmethod
    def logcap(cls) -> "LineWeight":
        return cls("logcap")

    @classmethod
    def constant(cls, c=1) -> "LineWeight":
        return cls("piecewise", outside=c)

    @classmethod
    def piecewise(cls, breaks, values, outside=1) -> "LineWeight":
        return cls("piecewise", breaks=tuple(breaks), values=tuple(values), outside=outside)

    def __call__(self, x: float) -> float:
        if self.kind == "power":
            return abs(x) ** float(self.alpha) if x != 0 or self.alpha >= 0 else math.inf
        if self.kind == "logcap":
            return max(-math.log(abs(x)), 1.0) if x != 0 else math.inf
        for k in range(len(self.values)):
            if self.breaks[k] <= x < self.breaks[k + 1]:
                return float(self.values[k])
        return float(self.outside)

    def sup_norm(self) -> Fraction:
        if self.kind != "piecewise":
            raise ValidationError("only piecewise weights are bounded")
        return max((self.outside,) + self.values)

    def to_json(self) -> dict:
        return {"kind": self.kind, "alpha": str(self.alpha), "breaks": [str(b) for b in self.breaks],
                "values": [str(v) for v in self.values], "outside": str(self.outside)}

    @classmethod
    def from_json(cls, d: dict) -> "LineWeight":
        return cls(d["kind"], d.get("alpha", "0"), tuple(d.get("breaks", ())), tuple(d.get("values", ())),
                   d.get("outside", "1"))


# antiderivatives ----------------------------------------------------------------

def _logcap_G(x: float) -> float:
    """Odd antiderivative of max(log(1/|x|), 1) vanishing at 0."""
    s = 1.0 if x >= 0 else -1.0
    a = abs(x)
    if a == 0:
        return 0.0
    if a <= INV_E:
        return s * a * (1 - math.log(a))
    return s * (a + INV_E)


def _logcap_G_sym(x: Fraction):
    s = 1 if x >= 0 else -1
    a = sp.Rational(abs(x).numerator, abs(x).denominator)
    if a == 0:
        return sp.Integer(0)
    if a <= sp.exp(-1):
        return s * a * (1 - sp.log(a))
    return s * (a + sp.exp(-1))


def _piecewise_integral(w: LineWeight, a: Fraction, b: Fraction) -> Fraction:
    total = Fraction(0)
    pts = [a] + [x for x in w.breaks if a < x < b] + [b]
    for lo, hi in zip(pts, pts[1:]):
        mid = (lo + hi) / 2
        v = w.outside
        for k in range(len(w.values)):
            if w.breaks[k] <= mid < w.breaks[k + 1]:
                v = w.values[k]
                break
        total += v * (hi - lo)
    return total


def line_integral(w: LineWeight, a, b, *, exact: bool = False):
    """Integral of w over [a, b].

    piecewise -> Fraction; power with integer alpha >= 0 -> Fraction;
    otherwise float, or a sympy expression when exact=True."""
    a, b = as_fraction(a), as_fraction(b)
    if not a < b:
        raise ValidationError("line_integral needs a < b")
    if w.kind == "piecewise":
        return _piecewise_integral(w, a, b)
    if w.kind == "power":
        al = w.alpha
        if al.denominator == 1 and al >= 0:
            n = int(al)

            def P(x: Fraction) -> Fraction:
                return (1 if x >= 0 else -1) * abs(x) ** (n + 1) / (n + 1)

            return P(b) - P(a)
        if exact:
            e = sp.Rational(al.numerator, al.denominator) + 1

            def S(x: Fraction):
                s = 1 if x >= 0 else -1
                return s * sp.Abs(sp.Rational(x.numerator, x.denominator)) ** e / e

            return S(b) - S(a)
        e = float(al) + 1
        return (math.copysign(abs(float(b)) ** e, float(b)) - math.copysign(abs(float(a)) ** e, float(a))) / e
    if exact:
        return _logcap_G_sym(b) - _logcap_G_sym(a)
    return _logcap_G(float(b)) - _logcap_G(float(a))


def logcap_power_integral(a: float, b: float, r: float) -> float:
    """Integral of max(log(1/|x|), 1)^r over [a, b] via the incomplete gamma function."""

    def G(x: float) -> float:
        s = 1.0 if x >= 0 else -1.0
        y = abs(x)
        if y == 0:
            return 0.0
        if y <= INV_E:
            return s * special.gammaincc(r + 1, -math.log(y)) * special.gamma(r + 1)
        full = special.gammaincc(r + 1, 1.0) * special.gamma(r + 1)
        return s * (full + y - INV_E)

    return G(b) - G(a)


def line_power_integral(w: LineWeight, a: float, b: float, r: float) -> float:
    """Integral of w^r over [a, b]."""
    if w.kind == "logcap":
        return logcap_power_integral(a, b, r)
    if w.kind == "power":
        return _power_r_integral(float(w.alpha), a, b, r)
    pts = [a] + [float(x) for x in w.breaks if a < x < b] + [b]
    return math.fsum(w((lo + hi) / 2) ** r * (hi - lo) for lo, hi in zip(pts, pts[1:]))


def _power_r_integral(al: float, a: float, b: float, r: float) -> float:
    e = al * r + 1
    if e <= 0:
        return math.inf
    return (math.copysign(abs(b) ** e, b) - math.copysign(abs(a) ** e, a)) / e


# real-line constants --------------------------------------------------------------

def _ess_inf(w: LineWeight, a: float, b: float) -> float:
    if w.kind == "logcap":
        return max(-math.log(max(abs(a), abs(b))), 1.0)
    if w.kind == "power":
        if a < 0 < b:
            return 0.0 if w.alpha > 0 else min(abs(a), abs(b)) ** float(w.alpha)
        lo, hi = sorted((abs(a), abs(b)))
        return lo ** float(w.alpha) if w.alpha >= 0 else hi ** float(w.alpha)
    pts = [a] + [float(x) for x in w.breaks if a < x < b] + [b]
    return min(w((lo + hi) / 2) for lo, hi in zip(pts, pts[1:]))


def real_line_family(n: int = 40) -> List[Tuple[float, float]]:
    """Intervals [a, b] with endpoints on a grid dense near 0 and reaching out to +-4."""
    pos = sorted({math.exp(-s / 4) for s in range(0, 4 * 6)} | {k / 4 for k in range(1, 17)})
    pts = sorted({0.0} | set(pos) | {-p for p in pos})
    step = max(1, len(pts) // n)
    grid = sorted(set(pts[::step]) | {pts[-1]})
    return [(a, b) for i, a in enumerate(grid) for b in grid[i + 1:]]


def estimate_a1_real(w: LineWeight, family: Optional[Sequence[Tuple[float, float]]] = None) -> float:
    """max over the family of avg_I(w) / ess inf_I(w), a lower bound for [w]_A1(R)."""
    family = family or real_line_family()
    best = 1.0
    for a, b in family:
        inf = _ess_inf(w, a, b)
        if inf == 0:
            return math.inf
        avg = float(line_integral(w, Fraction(a), Fraction(b))) / (b - a)
        best = max(best, avg / inf)
    return best


def estimate_rh_real(w: LineWeight, r: float, family: Optional[Sequence[Tuple[float, float]]] = None) -> float:
    """max over the family of avg_I(w^r)^(1/r) / avg_I(w)."""
    family = family or real_line_family()
    best = 1.0
    for a, b in family:
        avg = float(line_integral(w, Fraction(a), Fraction(b))) / (b - a)
        rmean = (line_power_integral(w, a, b, r) / (b - a)) ** (1 / r)
        best = max(best, rmean / avg)
    return best


# periodization --------------------------------------------------------------------

@dataclass
class PeriodizedWeight:
    base: LineWeight
    lam: Fraction
    K: int = 32

    def __post_init__(self):
        self.lam = as_fraction(self.lam)
        if self.lam <= 1:
            raise TailDiverges(f"lambda = {self.lam} does not give summable coefficients")
        if self.K < 1:
            raise ValidationError("K must be positive")

    def coeff(self, k: int) -> Fraction:
        return 1 / self.lam ** abs(k)

    def tail_sup(self, K: Optional[int] = None) -> float:
        """Upper bound for sum_{|k| > K} a_k w(x + k), uniformly in x in [0, 1)."""
        K = self.K if K is None else K
        lam = float(self.lam)
        geo = 2 * lam ** (-K) / (lam - 1)
        if self.base.kind == "piecewise":
            return float(self.base.sup_norm()) * geo
        if self.base.kind == "logcap":
            return geo
        al = float(self.base.alpha)
        if al <= 0:
            return geo
        # sup of |x|^alpha on [k, k+1] and [-k, -k+1] is at most (k+1)^alpha
        return 2 * _geometric_poly_tail(lam, al, K)

    def tail_integral(self, length: float, K: Optional[int] = None) -> float:
        """Upper bound for the discarded mass over an interval of the given length."""
        return self.tail_sup(K) * length

    def value(self, x: float, K: Optional[int] = None) -> float:
        """Truncated sum at x in [0, 1); the true value lies in [value, value + tail_sup]."""
        K = self.K if K is None else K
        lam = float(self.lam)
        return math.fsum(lam ** (-abs(k)) * self.base(x + k) for k in range(-K, K + 1))

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "lambda": str(self.lam), "K": self.K}


def _geometric_poly_tail(lam: float, al: float, K: int) -> float:
    """Upper bound for sum_{k > K} (k+1)^al lam^-k by a ratio test."""
    k0 = K + 1
    while ((k0 + 2) / (k0 + 1)) ** al / lam >= 1:
        k0 += 1
        if k0 > 10 * K + 10 ** 6:
            raise TailDiverges("tail ratio never drops below 1")
    head = math.fsum((k + 1) ** al * lam ** (-k) for k in range(K + 1, k0))
    rho = ((k0 + 2) / (k0 + 1)) ** al / lam
    return head + (k0 + 1) ** al * lam ** (-k0) / (1 - rho)


@dataclass
class PeriodicIntegral:
    value: Union[Fraction, float]
    error: float
    K: int


def _truncated(pw: PeriodizedWeight, pieces, K: int):
    exact = pw.base.kind == "piecewise" or (pw.base.kind == "power" and pw.base.alpha.denominator == 1
                                             and pw.base.alpha >= 0)
    total = Fraction(0) if exact else 0.0
    for k in range(-K, K + 1):
        c = pw.coeff(k)
        for lo, hi in pieces:
            v = line_integral(pw.base, lo + k, hi + k)
            total += c * v if exact else float(c) * float(v)
    return total


def periodize_integral(pw: PeriodizedWeight, I: Arc, *, rel_tol: float = 1e-9) -> PeriodicIntegral:
    """Integral of the periodization over a circle arc, raising K until the tail is below rel_tol."""
    K = pw.K
    pieces = I.pieces()
    while True:
        val = _truncated(pw, pieces, K)
        err = pw.tail_integral(float(I.length), K)
        if err <= rel_tol * float(val) or K >= K_MAX:
            return PeriodicIntegral(val, err, K)
        K *= 2


def periodize_integral_alt(pw: PeriodizedWeight, I: Arc, K: Optional[int] = None) -> PeriodicIntegral:
    """Same integral for a wrapping arc through the one-piece representative [a - 1, b).

    On [a - 1, 0) the circle point is x + 1, so the term w(x + j) carries the
    coefficient a_{j-1}."""
    K = pw.K if K is None else K
    if not I.wraps:
        return periodize_integral(pw, I)
    (a, _), (_, b) = I.pieces()
    total = 0.0
    for j in range(-K, K + 1):
        total += float(pw.coeff(j - 1)) * float(line_integral(pw.base, a - 1 + j, Fraction(j)))
        total += float(pw.coeff(j)) * float(line_integral(pw.base, Fraction(j), b + j))
    return PeriodicIntegral(total, pw.tail_integral(float(I.length), K - 1), K)


def _power_integral_on_circle(pw: PeriodizedWeight, I: Arc, r: float, K: int) -> Tuple[float, float]:
    """Bounds for the integral of p^r over the arc by adaptive quadrature of the truncated sum."""
    tau = pw.tail_sup(K)
    lo_total = hi_total = 0.0
    for lo, hi in I.pieces():
        pts = [p for p in (INV_E, 1 - INV_E) if lo < p < hi]
        f = lambda x: pw.value(x, K) ** r
        g = lambda x: (pw.value(x, K) + tau) ** r
        a, _ = integrate.quad(f, float(lo), float(hi), points=pts or None, limit=200)
        b, _ = integrate.quad(g, float(lo), float(hi), points=pts or None, limit=200)
        lo_total += a
        hi_total += b
    return lo_total, hi_total


# checks ------------------------------------------------------------------------------

def default_interval_family(n: int = 64) -> List[Arc]:
    """n arcs of assorted lengths and starts, about a quarter of them wrapping around 0."""
    out = []
    lengths = [Fraction(1, 2 ** s) for s in range(1, 5)] + [Fraction(3, 8), Fraction(3, 16)]
    k = 0
    while len(out) < n:
        length = lengths[k % len(lengths)]
        start = Fraction((7 * k) % 32, 32)
        out.append(Arc(start, length))
        k += 1
    return out


@dataclass
class PerioReport:
    kind: str
    bound: float
    rows: List[Tuple[str, float, float]] = field(default_factory=list)
    violations: int = 0
    wrapped: int = 0

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_perio_a1(pw: PeriodizedWeight, intervals: Optional[Sequence[Arc]] = None, *, a1_real: Optional[float] = None,
                   samples: int = 64) -> PerioReport:
    """avg_I(p) <= lam^2 [w]_A1(R) p(x) at sampled x in I (conservative in the tails)."""
    intervals = intervals or default_interval_family()
    a1 = a1_real if a1_real is not None else (1.0 if pw.base.kind == "piecewise" and not pw.base.values
                                              else estimate_a1_real(pw.base))
    bound = float(pw.lam) ** 2 * a1
    rep = PerioReport("A1", bound)
    for I in intervals:
        res = periodize_integral(pw, I)
        avg_hi = (float(res.value) + res.error) / float(I.length)
        worst = math.inf
        for t in range(samples):
            x = (float(I.start) + float(I.length) * (t + 0.5) / samples) % 1.0
            worst = min(worst, pw.value(x, res.K))
        ratio = avg_hi / worst
        rep.rows.append((f"[{I.start}, +{I.length})", ratio, bound))
        rep.wrapped += I.wraps
        if ratio > bound:
            rep.violations += 1
    return rep


def check_perio_rh(pw: PeriodizedWeight, r, intervals: Optional[Sequence[Arc]] = None, *,
                   rh_real: Optional[float] = None) -> PerioReport:
    """(avg_I p^r)^(1/r) <= lam^2 [w]_RH_r(R) avg_I(p), quadrature with tail brackets."""
    rf = float(as_fraction(r)) if not isinstance(r, float) else r
    intervals = intervals or default_interval_family()
    rh = rh_real if rh_real is not None else (1.0 if pw.base.kind == "piecewise" and not pw.base.values
                                              else estimate_rh_real(pw.base, rf))
    bound = float(pw.lam) ** 2 * rh
    rep = PerioReport(f"RH_{rf:g}", bound)
    for I in intervals:
        res = periodize_integral(pw, I)
        L = float(I.length)
        _, hi = _power_integral_on_circle(pw, I, rf, res.K)
        ratio = (hi / L) ** (1 / rf) / (float(res.value) / L)
        rep.rows.append((f"[{I.start}, +{I.length})", ratio, bound))
        rep.wrapped += I.wraps
        if ratio > bound:
            rep.violations += 1
    return rep


# bridge into the torus ------------------------------------------------------------

def staircase(pw: PeriodizedWeight, s: int) -> Tuple[WeightFn, WeightFn]:
    """Lower and upper step weights in coordinate 1 on the dyadic cells of size 2^-s.

    Cell values are rational brackets of the cell averages, so their
    integrals bracket the periodization on every dyadic interval of size at
    least 2^-s."""
    n = 1 << s
    lows, highs = [], []
    for t in range(n):
        cell = Arc(Fraction(t, n), Fraction(1, n))
        res = periodize_integral(pw, cell)
        avg = res.value * n
        err = Fraction(res.error) * n if isinstance(res.value, Fraction) else res.error * n
        if isinstance(res.value, Fraction):
            lo, hi = avg, avg + rational_above(Fraction(err))
        else:
            # one unit of 1e-12 absorbs the float rounding of avg
            lo = Fraction(math.floor(avg * 10 ** 12) - 1, 10 ** 12)
            hi = Fraction(math.ceil((avg + err) * 10 ** 12) + 1, 10 ** 12)
        lows.append(max(lo, Fraction(1, 10 ** 12)))
        highs.append(hi)

    def build(vals):
        pieces = [(Region.interval_box((Fraction(t, n), Fraction(t + 1, n))), v) for t, v in enumerate(vals)]
        return WeightFn.of(SimpleFunction(1, pieces, vals[0], check=False))

    return build(lows), build(highs)
