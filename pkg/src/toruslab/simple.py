"""Cylindrical simple functions, weights, integrals and L^q norms.

Norms are returned as q-th powers so that everything stays rational.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import grid as G
from .basis import CubeSpec, cube_region
from .errors import NonPositive, ValidationError
from .exact import PowerProduct, as_fraction, frac_pair, rational_power
from .torus import ONE, ZERO, Point, Region, region_intersect, region_subtract


class SimpleFunction:
    """Finitely valued function: disjoint regions with values, `default` elsewhere."""

    __slots__ = ("depth", "pieces", "default")

    def __init__(self, depth: int, pieces: Iterable[Tuple[Region, object]] = (), default=0, *, check: bool = True):
        self.depth = depth
        self.default = as_fraction(default)
        cleaned = []
        for region, value in pieces:
            v = as_fraction(value)
            if region.depth > depth:
                raise ValidationError("piece deeper than the function")
            if v == self.default or region.is_empty():
                continue
            cleaned.append((region.promote(depth), v))
        self.pieces: Tuple[Tuple[Region, Fraction], ...] = tuple(cleaned)
        if check:
            for i in range(len(cleaned)):
                for k in range(i + 1, len(cleaned)):
                    if region_intersect(cleaned[i][0], cleaned[k][0]).measure() != 0:
                        raise ValidationError("pieces are not pairwise disjoint")
            if sum((r.measure() for r, _ in cleaned), ZERO) > 1:
                raise ValidationError("pieces cover more than the torus")

    # constructors -------------------------------------------------------
    @classmethod
    def constant(cls, value) -> "SimpleFunction":
        return cls(0, (), value)

    @classmethod
    def indicator(cls, region: Region, value=1) -> "SimpleFunction":
        return cls(region.depth, [(region, value)], 0, check=False)

    @classmethod
    def from_grid(cls, spec: G.GridSpec, values: np.ndarray, default=None) -> "SimpleFunction":
        """Group grid cells by value; runs along the last axis become one box."""
        depth = len(spec)
        if depth == 0:
            return cls.constant(values[()] if isinstance(values, np.ndarray) else values)
        flat_vals = values.ravel().tolist()
        vol = G.cell_volumes(spec).ravel().tolist()
        if default is None:
            mass: Dict[Fraction, Fraction] = {}
            for v, c in zip(flat_vals, vol):
                mass[v] = mass.get(v, ZERO) + c
            # most massive value becomes the default; 0 wins ties for readability
            default = max(mass, key=lambda v: (mass[v], v == 0, -abs(v)))
        default = as_fraction(default)
        boxes: Dict[Fraction, List] = {}
        last = spec[-1]
        for head in np.ndindex(*values.shape[:-1]):
            row = values[head]
            prefix = tuple((spec[i][h], spec[i][h + 1]) for i, h in enumerate(head))
            k = 0
            n = len(row)
            while k < n:
                v = row[k]
                e = k + 1
                while e < n and row[e] == v:
                    e += 1
                if v != default:
                    boxes.setdefault(v, []).append(prefix + ((last[k], last[e]),))
                k = e
        pieces = [(Region.from_raw(depth, bs), v) for v, bs in sorted(boxes.items())]
        return cls(depth, pieces, default, check=False)

    @classmethod
    def from_json(cls, data: dict) -> "SimpleFunction":
        pieces = [(Region.from_json(p["region"]), as_fraction(p["value"])) for p in data["pieces"]]
        default = as_fraction(data.get("default", [0, 1]))
        return cls(int(data["depth"]), pieces, default)

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "pieces": [{"region": r.to_json(), "value": frac_pair(v)} for r, v in self.pieces],
            "default": frac_pair(self.default),
        }

    # basic queries ---------------------------------------------------------
    def value_at(self, x: Point) -> Fraction:
        for r, v in self.pieces:
            if r.contains(x):
                return v
        return self.default

    def values(self) -> List[Fraction]:
        vals = {v for _, v in self.pieces}
        if self.support_measure() < 1:
            vals.add(self.default)
        return sorted(vals)

    def support_measure(self) -> Fraction:
        return sum((r.measure() for r, _ in self.pieces), ZERO)

    def rest_region(self) -> Region:
        """Where the default value applies."""
        rest = Region.full(self.depth)
        for r, _ in self.pieces:
            rest = region_subtract(rest, r)
        return rest

    def abs(self) -> "SimpleFunction":
        return SimpleFunction(self.depth, [(r, abs(v)) for r, v in self.pieces], abs(self.default), check=False)

    def scale(self, c) -> "SimpleFunction":
        c = as_fraction(c)
        return SimpleFunction(self.depth, [(r, c * v) for r, v in self.pieces], c * self.default, check=False)

    def promote(self, depth: int) -> "SimpleFunction":
        return SimpleFunction(depth, [(r.promote(depth), v) for r, v in self.pieces], self.default, check=False)

    def grid_spec(self) -> G.GridSpec:
        return tuple(G.normalize_breaks(self._axis_points(i)) for i in range(self.depth))

    def _axis_points(self, i: int):
        pts = set()
        for r, _ in self.pieces:
            for b in r.raw_boxes:
                pts.add(b[i][0])
                pts.add(b[i][1])
        return pts

    def to_grid(self, spec: Optional[G.GridSpec] = None) -> Tuple[G.GridSpec, np.ndarray]:
        """Cell values on `spec` (which must refine the function's own breakpoints)."""
        own = self.grid_spec()
        spec = own if spec is None else G.merge_specs(spec, own)
        arr = G.constant(spec, self.default)
        index = [{x: k for k, x in enumerate(b)} for b in spec]
        for r, v in self.pieces:
            for b in r.raw_boxes:
                sl = tuple(slice(index[i][lo], index[i][hi]) for i, (lo, hi) in enumerate(b))
                arr[sl] = v
        return spec, arr

    def restrict(self, region: Region) -> "SimpleFunction":
        """f * chi_region."""
        d = max(self.depth, region.depth)
        pieces = [(region_intersect(r, region), v) for r, v in self.pieces]
        if self.default != 0:
            pieces.append((region_intersect(self.rest_region(), region), self.default))
        return SimpleFunction(d, pieces, 0, check=False)

    # integration ---------------------------------------------------------
    def integral_over(self, region: Region, w: Optional["WeightFn"] = None) -> Fraction:
        """Exact integral of f (times w) over a region."""
        total = ZERO
        covered = ZERO
        for r, v in self.pieces:
            part = region_intersect(r, region)
            if part.is_empty():
                continue
            m = weight_measure(w, part)
            total += v * m
            covered += m
        if self.default != 0:
            total += self.default * (weight_measure(w, region) - covered)
        return total

    def integral(self, w: Optional["WeightFn"] = None) -> Fraction:
        return self.integral_over(Region.full(0), w)

    def __repr__(self) -> str:
        return f"SimpleFunction(depth={self.depth}, pieces={len(self.pieces)}, default={self.default})"


class WeightFn(SimpleFunction):
    """Strictly positive simple function."""

    __slots__ = ()

    def __init__(self, depth: int, pieces=(), default=1, *, check: bool = True):
        super().__init__(depth, pieces, default, check=check)
        if self.default <= 0 or any(v <= 0 for _, v in self.pieces):
            raise NonPositive("weights must be strictly positive")

    @classmethod
    def of(cls, f: SimpleFunction) -> "WeightFn":
        return cls(f.depth, f.pieces, f.default, check=False)

    @classmethod
    def flat(cls, c=1) -> "WeightFn":
        return cls(0, (), c)

    @classmethod
    def from_json(cls, data: dict) -> "WeightFn":
        return cls.of(SimpleFunction.from_json(data))

    def measure(self, region: Region) -> Fraction:
        return weight_measure(self, region)

    def power_integral(self, region: Region, s) -> Fraction:
        """Exact integral of w^s over a region, s an integer."""
        s = int(s)
        covered = ZERO
        total = ZERO
        for r, v in self.pieces:
            part = region_intersect(r, region)
            if part.is_empty():
                continue
            m = part.measure()
            total += v ** s * m
            covered += m
        return total + self.default ** s * (region.measure() - covered)

    def power_integral_float(self, region: Region, s: float) -> float:
        covered = ZERO
        total = 0.0
        for r, v in self.pieces:
            part = region_intersect(r, region)
            if part.is_empty():
                continue
            m = part.measure()
            total += float(v) ** s * float(m)
            covered += m
        return total + float(self.default) ** s * float(region.measure() - covered)

    def is_constant(self) -> bool:
        return not self.pieces


def weight_measure(w: Optional[SimpleFunction], region: Region) -> Fraction:
    """w(region); Lebesgue measure when w is None."""
    if w is None:
        return region.measure()
    covered = ZERO
    total = ZERO
    for r, v in w.pieces:
        part = region_intersect(r, region)
        if part.is_empty():
            continue
        m = part.measure()
        total += v * m
        covered += m
    return total + w.default * (region.measure() - covered)


def average(f: SimpleFunction, Q: CubeSpec) -> Fraction:
    return f.integral_over(cube_region(Q)) / Q.measure()


def _level_measures(f: SimpleFunction, w: Optional[SimpleFunction]) -> Dict[Fraction, Fraction]:
    """w-measure of {|f| = v} for every value v taken on a set of positive measure."""
    out: Dict[Fraction, Fraction] = {}
    covered = ZERO
    for r, v in f.pieces:
        m = weight_measure(w, r)
        out[abs(v)] = out.get(abs(v), ZERO) + m
        covered += m
    if f.support_measure() < 1:
        total = weight_measure(w, Region.full(0))
        out[abs(f.default)] = out.get(abs(f.default), ZERO) + (total - covered)
    return out


def lq_norm_q(f: SimpleFunction, q, w: Optional[SimpleFunction] = None, *, exact: bool = True):
    """sum |v|^q w({f = v}), the q-th power of the L^q(w) norm."""
    q = as_fraction(q)
    if q < 1:
        raise ValidationError("q must be >= 1")
    levels = _level_measures(f, w)
    if not exact:
        return sum(float(v) ** float(q) * float(m) for v, m in levels.items() if v != 0)
    total = ZERO
    for v, m in levels.items():
        if v == 0 or m == 0:
            continue
        total += rational_power(v, q) * m
    return total


def weak_lq_norm_q(f: SimpleFunction, q, w: Optional[SimpleFunction] = None, *, symbolic: bool = False):
    """max over values v of v^q w({|f| >= v}), the q-th power of the weak norm.

    With symbolic=True the result is a PowerProduct, so irrational powers
    remain exactly comparable; otherwise IrrationalPower is raised."""
    q = as_fraction(q)
    if q < 1:
        raise ValidationError("q must be >= 1")
    levels = _level_measures(f, w)
    vals = sorted((v for v in levels if v != 0), reverse=True)
    best = PowerProduct(0) if symbolic else ZERO
    cum = ZERO
    for v in vals:
        cum += levels[v]
        if symbolic:
            cand = PowerProduct(cum, [(v, q)])
        else:
            cand = rational_power(v, q) * cum
        if cand > best:
            best = cand
    return best


def weak_lq_norm_q_float(f: SimpleFunction, q: float, w: Optional[SimpleFunction] = None) -> float:
    levels = _level_measures(f, w)
    vals = sorted((v for v in levels if v != 0), reverse=True)
    best = 0.0
    cum = ZERO
    for v in vals:
        cum += levels[v]
        best = max(best, float(v) ** q * float(cum))
    return best


class StepFactor:
    """Positive piecewise-constant function on [0,1): values[k] on [breaks[k], breaks[k+1])."""

    def __init__(self, breaks: Sequence, values: Sequence):
        b = tuple(as_fraction(x) for x in breaks)
        v = tuple(as_fraction(x) for x in values)
        if len(b) != len(v) + 1 or b[0] != 0 or b[-1] != 1 or any(b[k] >= b[k + 1] for k in range(len(v))):
            raise ValidationError("step factor needs breaks 0 = b0 < ... < bk = 1 and k values")
        if any(x <= 0 for x in v):
            raise NonPositive("weight factor values must be positive")
        self.breaks = b
        self.values = v

    @classmethod
    def two_valued(cls, cut, inside, outside) -> "StepFactor":
        return cls([0, cut, 1], [inside, outside])

    def is_constant(self) -> bool:
        return len(set(self.values)) == 1

    def integral(self) -> Fraction:
        return sum((self.values[k] * (self.breaks[k + 1] - self.breaks[k]) for k in range(len(self.values))), ZERO)


def tensor_weight(factors: Sequence[Optional[StepFactor]]) -> WeightFn:
    """Product weight prod_i w_i(x_i); None or constant factors only rescale."""
    scale = ONE
    active: List[Tuple[int, StepFactor]] = []
    for i, fac in enumerate(factors):
        if fac is None:
            continue
        if fac.is_constant():
            scale *= fac.values[0]
        else:
            active.append((i, fac))
    depth = active[-1][0] + 1 if active else 0
    spec = []
    axis_vals = []
    for i in range(depth):
        fac = next((f for k, f in active if k == i), None)
        if fac is None:
            spec.append((ZERO, ONE))
            axis_vals.append(np.array([ONE], dtype=object))
        else:
            spec.append(fac.breaks)
            axis_vals.append(np.array(fac.values, dtype=object))
    vals = G.outer_all(axis_vals) * scale
    if depth == 0:
        return WeightFn.flat(scale)
    return WeightFn.of(SimpleFunction.from_grid(tuple(spec), vals))
