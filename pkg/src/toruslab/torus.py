"""Exact geometry of cylinder sets in the infinite-dimensional torus.

A region at depth n is a finite disjoint union of boxes, each a product of n
half-open circular arcs; all coordinates beyond n are free.  Internally every
box is stored with non-wrapping intervals [lo, hi) inside [0, 1], so a
wrapping arc contributes two pieces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, List, Sequence, Tuple

from .errors import ValidationError
from .exact import as_fraction

Interval = Tuple[Fraction, Fraction]
RawBox = Tuple[Interval, ...]

ZERO = Fraction(0)
ONE = Fraction(1)
FULL: Interval = (ZERO, ONE)


@dataclass(frozen=True)
class Arc:
    """Half-open arc [start, start+length) on the circle R/Z."""

    start: Fraction
    length: Fraction

    def __post_init__(self):
        s = as_fraction(self.start)
        ln = as_fraction(self.length)
        if not (0 <= s < 1):
            raise ValidationError(f"arc start {s} outside [0,1)")
        if not (0 < ln <= 1):
            raise ValidationError(f"arc length {ln} outside (0,1]")
        object.__setattr__(self, "start", s)
        object.__setattr__(self, "length", ln)

    @classmethod
    def full(cls) -> "Arc":
        return cls(ZERO, ONE)

    @property
    def wraps(self) -> bool:
        return self.start + self.length > 1

    def pieces(self) -> List[Interval]:
        end = self.start + self.length
        if end <= 1:
            return [(self.start, end)]
        if self.length == 1:
            return [FULL]
        return [(self.start, ONE), (ZERO, end - 1)]

    def contains(self, x: Fraction) -> bool:
        return (x - self.start) % 1 < self.length


@dataclass(frozen=True)
class Box:
    """Product of arcs in the first len(arcs) coordinates."""

    arcs: Tuple[Arc, ...]

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))

    @property
    def depth(self) -> int:
        return len(self.arcs)

    def measure(self) -> Fraction:
        m = ONE
        for a in self.arcs:
            m *= a.length
        return m

    def promote(self, depth: int) -> "Box":
        if depth < self.depth:
            raise ValidationError("cannot demote a box")
        return Box(self.arcs + (Arc.full(),) * (depth - self.depth))

    def raw_pieces(self) -> List[RawBox]:
        return [tuple(p) for p in product(*(a.pieces() for a in self.arcs))]


@dataclass(frozen=True)
class Point:
    """Point of the torus given by finitely many coordinates; the rest are 0."""

    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        cs = tuple(as_fraction(c) for c in self.coords)
        for c in cs:
            if not (0 <= c < 1):
                raise ValidationError(f"coordinate {c} outside [0,1)")
        object.__setattr__(self, "coords", cs)

    def coord(self, i: int) -> Fraction:
        """Coordinate i (0-based)."""
        return self.coords[i] if i < len(self.coords) else ZERO

    def __len__(self) -> int:
        return len(self.coords)


# raw box algebra --------------------------------------------------------

def _raw_measure(b: RawBox) -> Fraction:
    m = ONE
    for lo, hi in b:
        m *= hi - lo
    return m


def _raw_intersect(a: RawBox, b: RawBox):
    out = []
    for (alo, ahi), (blo, bhi) in zip(a, b):
        lo = alo if alo > blo else blo
        hi = ahi if ahi < bhi else bhi
        if lo >= hi:
            return None
        out.append((lo, hi))
    return tuple(out)


def _raw_subtract(a: RawBox, b: RawBox) -> List[RawBox]:
    """a minus b as at most 2n disjoint boxes."""
    if _raw_intersect(a, b) is None:
        return [a]
    out = []
    rest = list(a)
    for i, ((alo, ahi), (blo, bhi)) in enumerate(zip(a, b)):
        if alo < blo:
            piece = list(rest)
            piece[i] = (alo, blo)
            out.append(tuple(piece))
        if bhi < ahi:
            piece = list(rest)
            piece[i] = (bhi, ahi)
            out.append(tuple(piece))
        rest[i] = (max(alo, blo), min(ahi, bhi))
    return out


def _promote_raw(b: RawBox, depth: int) -> RawBox:
    return b + (FULL,) * (depth - len(b))


class Region:
    """Finite disjoint union of boxes at a given cylinder depth."""

    __slots__ = ("depth", "_raw", "_measure")

    def __init__(self, depth: int, boxes: Iterable[Box] = (), *, check: bool = True):
        raw: List[RawBox] = []
        for b in boxes:
            if b.depth > depth:
                raise ValidationError("box deeper than region")
            for piece in b.promote(depth).raw_pieces():
                raw.append(piece)
        self._init_raw(depth, raw, check)

    def _init_raw(self, depth: int, raw: Sequence[RawBox], check: bool):
        self.depth = depth
        self._raw = tuple(raw)
        self._measure = None
        if check:
            for i in range(len(self._raw)):
                for j in range(i + 1, len(self._raw)):
                    if _raw_intersect(self._raw[i], self._raw[j]) is not None:
                        raise ValidationError("region boxes are not pairwise disjoint")

    @classmethod
    def from_raw(cls, depth: int, raw: Iterable[RawBox], *, check: bool = False) -> "Region":
        r = cls.__new__(cls)
        r._init_raw(depth, [tuple(b) for b in raw], check)
        return r

    @classmethod
    def full(cls, depth: int = 0) -> "Region":
        return cls.from_raw(depth, [(FULL,) * depth])

    @classmethod
    def empty(cls, depth: int = 0) -> "Region":
        return cls.from_raw(depth, [])

    @classmethod
    def box(cls, *arcs) -> "Region":
        """Single box from (start, length) pairs or Arc objects."""
        arcs = tuple(a if isinstance(a, Arc) else Arc(*a) for a in arcs)
        return cls(len(arcs), [Box(arcs)])

    @classmethod
    def interval_box(cls, *intervals) -> "Region":
        """Single non-wrapping box from [lo, hi) pairs."""
        raw = tuple((as_fraction(lo), as_fraction(hi)) for lo, hi in intervals)
        for lo, hi in raw:
            if not (0 <= lo < hi <= 1):
                raise ValidationError(f"bad interval [{lo},{hi})")
        return cls.from_raw(len(raw), [raw])

    @property
    def raw_boxes(self) -> Tuple[RawBox, ...]:
        return self._raw

    @property
    def boxes(self) -> Tuple[Box, ...]:
        return tuple(Box(tuple(Arc(lo, hi - lo) for lo, hi in b)) for b in self._raw)

    def __len__(self) -> int:
        return len(self._raw)

    def promote(self, depth: int) -> "Region":
        if depth < self.depth:
            raise ValidationError("cannot demote a region")
        if depth == self.depth:
            return self
        return Region.from_raw(depth, [_promote_raw(b, depth) for b in self._raw])

    def measure(self) -> Fraction:
        if self._measure is None:
            self._measure = sum((_raw_measure(b) for b in self._raw), ZERO)
        return self._measure

    def is_empty(self) -> bool:
        return not self._raw

    def contains(self, x: Point) -> bool:
        for b in self._raw:
            if all(lo <= x.coord(i) < hi for i, (lo, hi) in enumerate(b)):
                return True
        return False

    def breakpoints(self, i: int) -> List[Fraction]:
        """Sorted interval endpoints in coordinate i (0-based), with 0 and 1."""
        pts = {ZERO, ONE}
        for b in self._raw:
            if i < len(b):
                pts.add(b[i][0])
                pts.add(b[i][1])
        return sorted(pts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Region):
            return NotImplemented
        d = max(self.depth, other.depth)
        a, b = self.promote(d), other.promote(d)
        return (
            a.measure() == b.measure()
            and region_subtract(a, b).measure() == 0
            and region_subtract(b, a).measure() == 0
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Region(depth={self.depth}, boxes={len(self._raw)}, measure={self.measure()})"

    # serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "boxes": [
                [[lo.numerator, lo.denominator, (hi - lo).numerator, (hi - lo).denominator] for lo, hi in b]
                for b in self._raw
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Region":
        depth = int(data["depth"])
        boxes = []
        for b in data["boxes"]:
            arcs = tuple(Arc(Fraction(sn, sd), Fraction(ln, ld)) for sn, sd, ln, ld in b)
            boxes.append(Box(arcs))
        return cls(depth, boxes)


# public operations ------------------------------------------------------

def _common(a: Region, b: Region):
    d = max(a.depth, b.depth)
    return d, a.promote(d), b.promote(d)


def region_intersect(a: Region, b: Region) -> Region:
    d, a, b = _common(a, b)
    out = []
    for x in a.raw_boxes:
        for y in b.raw_boxes:
            z = _raw_intersect(x, y)
            if z is not None:
                out.append(z)
    return Region.from_raw(d, out)


def region_subtract(a: Region, b: Region) -> Region:
    d, a, b = _common(a, b)
    out: List[RawBox] = []
    for x in a.raw_boxes:
        pieces = [x]
        for y in b.raw_boxes:
            if not pieces:
                break
            nxt = []
            for p in pieces:
                nxt.extend(_raw_subtract(p, y))
            pieces = nxt
        out.extend(pieces)
    return Region.from_raw(d, out)


def region_union(a: Region, b: Region) -> Region:
    d, a, b = _common(a, b)
    extra = region_subtract(b, a)
    return Region.from_raw(d, a.raw_boxes + extra.raw_boxes)


def region_complement(a: Region) -> Region:
    return region_subtract(Region.full(a.depth), a)


def region_measure(a: Region) -> Fraction:
    return a.measure()


def circle_distance(a: Fraction, b: Fraction) -> Fraction:
    d = abs(a - b) % 1
    return min(d, 1 - d)


def torus_metric(x: Point, y: Point, tail_depth: int) -> Tuple[Fraction, Fraction]:
    """Bracket of sum_n circle_dist(x_n, y_n) / 2^n using tail_depth terms."""
    if tail_depth < max(len(x), len(y)):
        raise ValidationError("tail_depth must cover all given coordinates")
    lower = ZERO
    for n in range(1, tail_depth + 1):
        lower += circle_distance(x.coord(n - 1), y.coord(n - 1)) / 2 ** n
    return lower, lower + Fraction(1, 2 ** tail_depth)
