"""Dyadic skeleton of the torus: sizelevels, fundamental domains, the
subgroups H_m, dyadic cells and cube realization.

A sizelevel m >= 1 is written uniquely as m = n^2 + j with 1 <= j <= 2n+1.
The fundamental domain V_m constrains the first n+1 coordinates and every
step m-1 -> m halves exactly one side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import List, Optional, Sequence, Tuple

from .errors import BoundaryPoint, CapExceeded, NotDyadic, ValidationError
from .exact import as_fraction, frac_pair
from .torus import Arc, Box, Point, Region

SUBGROUP_CAP = 22


@dataclass(frozen=True)
class SizeLevel:
    m: int
    n: int
    j: int

    @classmethod
    def of(cls, m: int) -> "SizeLevel":
        n, j = decompose(m)
        return cls(m, n, j)

    @property
    def nonfree(self) -> int:
        return nonfree_count(self.m)


def decompose(m: int) -> Tuple[int, int]:
    """(n, j) with m = n^2 + j, 1 <= j <= 2n+1; (0, 0) for the root."""
    if m < 0:
        raise ValidationError("sizelevel must be nonnegative")
    if m == 0:
        return 0, 0
    n = math.isqrt(m - 1)
    return n, m - n * n


def nonfree_count(m: int) -> int:
    """Number of constrained coordinates of V_m."""
    return 0 if m == 0 else decompose(m)[0] + 1


def side_exponent(m: int, i: int) -> int:
    """k with side 2^-k of V_m in coordinate i (1-based); 0 for free coordinates."""
    if m == 0:
        return 0
    n, j = decompose(m)
    if i > n + 1:
        return 0
    if j <= n:
        return n if i <= n else j
    return n + 1 if i <= j - n else n


def side_exponents(m: int) -> Tuple[int, ...]:
    return tuple(side_exponent(m, i) for i in range(1, nonfree_count(m) + 1))


def side_lengths(m: int) -> Tuple[Fraction, ...]:
    return tuple(Fraction(1, 1 << k) for k in side_exponents(m))


def fundamental_domain(m: int) -> Box:
    """The nonfree box of V_m, at depth l(m), anchored at 0."""
    return Box(tuple(Arc(Fraction(0), s) for s in side_lengths(m)))


def halved_coordinate(m: int) -> int:
    """1-based coordinate whose side halves from V_{m-1} to V_m."""
    if m < 1:
        raise ValidationError("halved_coordinate needs m >= 1")
    n, j = decompose(m)
    return n + 1 if j <= n else j - n


def subgroup_elements(m: int, cap: int = SUBGROUP_CAP) -> List[Point]:
    """All elements of H_m: multiples of the side lengths in each nonfree coordinate."""
    if m > cap:
        raise CapExceeded(f"H_{m} has 2^{m} elements, above the cap 2^{cap}; use locate")
    axes = [[Fraction(t, 1 << k) for t in range(1 << k)] for k in side_exponents(m)]
    return [Point(tuple(c)) for c in product(*axes)]


@dataclass(frozen=True)
class CubeSpec:
    """Translate of V_m by a rational vector on its nonfree coordinates."""

    m: int
    translation: Tuple[Fraction, ...]
    dyadic: Optional[bool] = None

    def __post_init__(self):
        if self.m < 0:
            raise ValidationError("sizelevel must be nonnegative")
        t = tuple(as_fraction(x) % 1 for x in self.translation)
        ell = nonfree_count(self.m)
        if len(t) != ell:
            raise ValidationError(f"translation needs {ell} coordinates for m={self.m}, got {len(t)}")
        object.__setattr__(self, "translation", t)
        actual = _is_grid_translation(self.m, t)
        if self.dyadic is None:
            object.__setattr__(self, "dyadic", actual)
        elif self.dyadic and not actual:
            raise NotDyadic("translation is not on the H_m grid")

    @property
    def nonfree(self) -> int:
        return len(self.translation)

    @property
    def sizelevel(self) -> SizeLevel:
        return SizeLevel.of(self.m)

    def sides(self) -> Tuple[Fraction, ...]:
        return side_lengths(self.m)

    def side(self, i: int) -> Fraction:
        """Side length in coordinate i (1-based)."""
        return Fraction(1, 1 << side_exponent(self.m, i))

    def measure(self) -> Fraction:
        return Fraction(1, 1 << self.m)

    def arcs(self) -> Tuple[Arc, ...]:
        return tuple(Arc(t, s) for t, s in zip(self.translation, self.sides()))

    def to_json(self) -> dict:
        return {"m": self.m, "translation": [frac_pair(t) for t in self.translation], "dyadic": bool(self.dyadic)}

    @classmethod
    def from_json(cls, data: dict) -> "CubeSpec":
        t = tuple(Fraction(int(a), int(b)) for a, b in data["translation"])
        return cls(int(data["m"]), t, bool(data["dyadic"]) if data.get("dyadic") else None)

    @classmethod
    def root(cls) -> "CubeSpec":
        return cls(0, ())


def _is_grid_translation(m: int, t: Sequence[Fraction]) -> bool:
    for i, x in enumerate(t, start=1):
        if x == 0:
            continue
        k = side_exponent(m, i)
        if (x * (1 << k)).denominator != 1:
            return False
    return True


def locate(x: Point, m: int, strict: bool = False) -> CubeSpec:
    """Dyadic cube of level m containing x, by flooring each coordinate."""
    t = []
    for i, k in enumerate(side_exponents(m)):
        xi = x.coord(i)
        scaled = xi * (1 << k)
        if strict and scaled.denominator == 1:
            raise BoundaryPoint(f"coordinate {i + 1} = {xi} is on a cell boundary at level {m}")
        t.append(Fraction(math.floor(scaled), 1 << k))
    return CubeSpec(m, tuple(t), True)


def cube_region(c: CubeSpec) -> Region:
    return Region(c.nonfree, [Box(c.arcs())], check=False)


def parent(c: CubeSpec) -> CubeSpec:
    """Dyadic cube of level m-1 containing the dyadic cube c."""
    if not c.dyadic:
        raise NotDyadic("parent needs a dyadic cube")
    if c.m == 0:
        raise ValidationError("the root has no parent")
    ell = nonfree_count(c.m - 1)
    t = list(c.translation[:ell])
    i = halved_coordinate(c.m)
    if i <= ell:
        k = side_exponent(c.m - 1, i)
        t[i - 1] = Fraction(math.floor(t[i - 1] * (1 << k)), 1 << k)
    return CubeSpec(c.m - 1, tuple(t), True)


def ancestor_chain(c: CubeSpec) -> List[CubeSpec]:
    """[c, parent(c), ..., root]."""
    if not c.dyadic:
        raise NotDyadic("ancestor_chain needs a dyadic cube")
    chain = [c]
    while chain[-1].m > 0:
        chain.append(parent(chain[-1]))
    return chain


def dyadic_cubes(m: int, cap: int = SUBGROUP_CAP) -> List[CubeSpec]:
    """All cells of N_m."""
    return [CubeSpec(m, p.coords, True) for p in subgroup_elements(m, cap)]


def translate(c: CubeSpec, shift: Sequence[Fraction]) -> CubeSpec:
    """c shifted by a vector on its nonfree coordinates (missing entries are 0)."""
    t = tuple((x + (as_fraction(shift[i]) if i < len(shift) else 0)) % 1 for i, x in enumerate(c.translation))
    return CubeSpec(c.m, t)
