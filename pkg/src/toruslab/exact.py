"""Exact rational helpers and products of rational powers.

Weak-type quotients raised to a rational power q are generally irrational,
for instance (1/2)^(3/2).  ``PowerProduct`` keeps numbers of the form
c * prod b_i^(e_i) with rational c, b_i > 0, e_i so that they can still be
compared exactly: raising both sides to the common denominator of the
exponents turns the comparison into one between rationals.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Optional, Tuple, Union

from .errors import IrrationalPower, ValidationError

Number = Union[int, Fraction]


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions, decimal strings and 'a/b' strings to Fraction.

    Floats are rejected; exact code paths must never see them silently.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ValidationError("booleans are not numbers here")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    raise ValidationError(f"cannot convert {x!r} to an exact rational")


def frac_pair(x: Fraction) -> list:
    x = Fraction(x)
    return [x.numerator, x.denominator]


def integer_root(n: int, k: int) -> Optional[int]:
    """Exact k-th root of a nonnegative integer, or None."""
    if n < 0 or k < 1:
        raise ValueError("integer_root needs n >= 0 and k >= 1")
    if n in (0, 1) or k == 1:
        return n
    r = integer_floor_root(n, k)
    return r if r ** k == n else None


def integer_floor_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) for integers n >= 0, computed exactly."""
    if n < 2:
        return n
    # float guess, then Newton correction in integers
    guess = int(round(math.exp(math.log(n) / k))) if n.bit_length() < 1000 else 1 << (n.bit_length() // k)
    x = max(guess, 1)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def rational_root(x: Fraction, k: int) -> Optional[Fraction]:
    x = Fraction(x)
    if x < 0:
        if k % 2 == 0:
            return None
        r = rational_root(-x, k)
        return None if r is None else -r
    a = integer_root(x.numerator, k)
    b = integer_root(x.denominator, k)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def rational_power(x: Number, q: Number) -> Fraction:
    """x**q exactly, raising IrrationalPower when the result is irrational."""
    x = Fraction(x)
    q = Fraction(q)
    if x == 0:
        if q <= 0:
            raise ValidationError("0 raised to a nonpositive power")
        return Fraction(0)
    r = rational_root(x, q.denominator)
    if r is None:
        raise IrrationalPower(f"{x}^{q} is irrational")
    return r ** q.numerator


def floor_power(x: Number, q: Number) -> int:
    """floor(x**q) exactly for x >= 0 rational and q >= 0 rational."""
    x = Fraction(x)
    q = Fraction(q)
    if x < 0 or q < 0:
        raise ValidationError("floor_power needs x >= 0 and q >= 0")
    v = x ** q.numerator  # rational
    # floor(v^(1/d)) = floor(floor_root(num * den^(d-1)) / den)
    d = q.denominator
    num, den = v.numerator, v.denominator
    return integer_floor_root(num * den ** (d - 1), d) // den


def _fraction_log(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


class PowerProduct:
    """Exact number c * prod(base ** exp) with rational c, positive rational
    bases and rational exponents.  Integer parts of exponents are folded into
    c, so the stored exponents lie strictly between 0 and 1."""

    __slots__ = ("coeff", "factors")

    def __init__(self, coeff: Number = 1, factors: Iterable[Tuple[Number, Number]] = ()):
        c = Fraction(coeff)
        merged: dict = {}
        for b, e in factors:
            b = Fraction(b)
            e = Fraction(e)
            if b <= 0:
                if b == 0 and e > 0:
                    c = Fraction(0)
                    continue
                raise ValidationError("PowerProduct bases must be positive")
            if b == 1 or e == 0:
                continue
            merged[b] = merged.get(b, Fraction(0)) + e
        out = []
        if c != 0:
            for b in sorted(merged):
                e = merged[b]
                whole = math.floor(e)
                frac = e - whole
                if whole:
                    c *= b ** whole
                if frac:
                    out.append((b, frac))
        self.coeff = c
        self.factors = tuple(out)

    @classmethod
    def power(cls, base: Number, exp: Number) -> "PowerProduct":
        return cls(1, [(base, exp)])

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def _lift(x) -> "PowerProduct":
        if isinstance(x, PowerProduct):
            return x
        return PowerProduct(as_fraction(x))

    def __mul__(self, other) -> "PowerProduct":
        o = self._lift(other)
        return PowerProduct(self.coeff * o.coeff, self.factors + o.factors)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "PowerProduct":
        o = self._lift(other)
        if o.coeff == 0:
            raise ZeroDivisionError("division by zero PowerProduct")
        return PowerProduct(self.coeff / o.coeff, self.factors + tuple((b, -e) for b, e in o.factors))

    def __rtruediv__(self, other) -> "PowerProduct":
        return self._lift(other) / self

    def __pow__(self, exp) -> "PowerProduct":
        e = as_fraction(exp)
        if self.coeff < 0 and e.denominator != 1:
            raise ValidationError("fractional power of a negative number")
        if self.coeff == 0:
            return PowerProduct(0)
        if e.denominator == 1:
            c = self.coeff ** e.numerator
            fac = [(b, x * e) for b, x in self.factors]
        else:
            c = Fraction(1)
            fac = [(self.coeff, e)] + [(b, x * e) for b, x in self.factors]
        return PowerProduct(c, fac)

    # comparison ---------------------------------------------------------
    def _sign(self) -> int:
        return (self.coeff > 0) - (self.coeff < 0)

    def _cmp(self, other) -> int:
        o = self._lift(other)
        sa, sb = self._sign(), o._sign()
        if sa != sb or sa == 0:
            return (sa > sb) - (sa < sb)
        ratio = self / o  # positive
        if not ratio.factors:
            c = ratio.coeff
        else:
            d = 1
            for _, e in ratio.factors:
                d = d * e.denominator // math.gcd(d, e.denominator)
            c = ratio.coeff ** d
            for b, e in ratio.factors:
                c *= b ** int(e * d)
        res = (c > 1) - (c < 1)
        return res if sa > 0 else -res

    def __eq__(self, other) -> bool:
        try:
            return self._cmp(other) == 0
        except ValidationError:
            return NotImplemented

    def __hash__(self):
        f = self.to_fraction()
        return hash(f) if f is not None else hash((self.coeff, self.factors))

    def __lt__(self, other) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other) -> bool:
        return self._cmp(other) >= 0

    # conversions --------------------------------------------------------
    def to_fraction(self) -> Optional[Fraction]:
        """The exact rational value, or None when irrational."""
        if not self.factors:
            return self.coeff
        d = 1
        for _, e in self.factors:
            d = d * e.denominator // math.gcd(d, e.denominator)
        v = Fraction(1)
        for b, e in self.factors:
            v *= b ** int(e * d)
        r = rational_root(v, d)
        return None if r is None else self.coeff * r

    def log(self) -> float:
        if self.coeff <= 0:
            raise ValueError("log of a nonpositive PowerProduct")
        return _fraction_log(self.coeff) + sum(float(e) * _fraction_log(b) for b, e in self.factors)

    def __float__(self) -> float:
        if self.coeff == 0:
            return 0.0
        s = 1.0 if self.coeff > 0 else -1.0
        return s * math.exp(PowerProduct(abs(self.coeff), self.factors).log())

    def to_json(self):
        f = self.to_fraction()
        if f is not None:
            return frac_pair(f)
        return {
            "coeff": frac_pair(self.coeff),
            "factors": [[frac_pair(b), frac_pair(e)] for b, e in self.factors],
        }

    def __repr__(self) -> str:
        if not self.factors:
            return f"PowerProduct({self.coeff})"
        terms = " * ".join(f"({b})^({e})" for b, e in self.factors)
        return f"PowerProduct({self.coeff} * {terms})"


def to_exact(x) -> Union[Fraction, PowerProduct]:
    """Collapse a PowerProduct to a Fraction when it is rational."""
    if isinstance(x, PowerProduct):
        f = x.to_fraction()
        return x if f is None else f
    return Fraction(x)


def rational_above(x, digits: int = 12) -> Fraction:
    """A rational r >= x with about `digits` significant digits."""
    x = PowerProduct._lift(x)
    f = x.to_fraction()
    if f is not None:
        return f
    scale = 10 ** digits
    r = Fraction(math.ceil(float(x) * scale), scale)
    while r < x:
        r += Fraction(1, scale)
    return r


def rational_below(x, digits: int = 12) -> Fraction:
    """A rational r <= x with about `digits` significant digits."""
    x = PowerProduct._lift(x)
    f = x.to_fraction()
    if f is not None:
        return f
    scale = 10 ** digits
    r = Fraction(math.floor(float(x) * scale), scale)
    while r > x:
        r -= Fraction(1, scale)
    return r
