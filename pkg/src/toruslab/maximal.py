"""Exact maximal functions over the dyadic cubes plus a finite set of extra cubes.

Averages over dyadic cubes of level m only see the first depth(f)
coordinates.  Once the level-m cells refine the grid of f, every average equals
the value of f, so the dyadic supremum is a finite maximum over the levels up
to the stabilization level.  Those levels are swept twice over one array:
bottom-up pairwise averaging along the halved coordinate, then top-down
running maxima.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import grid as G
from .basis import CubeSpec, halved_coordinate, nonfree_count, side_exponent
from .errors import DepthCapExceeded, NonDyadicBreakpoints, ZeroFunction
from .exact import as_fraction
from .simple import SimpleFunction, lq_norm_q, weak_lq_norm_q
from .torus import ONE, ZERO

DEPTH_CAP = 6
SPACING_CAP = Fraction(1, 64)
CELL_CAP = 1 << 21


@dataclass(frozen=True)
class BasisSpec:
    """Dyadic cubes (optionally) together with finitely many extra cubes."""

    include_dyadic: bool = True
    extra_cubes: Tuple[CubeSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "extra_cubes", tuple(self.extra_cubes))

    def with_cubes(self, cubes: Sequence[CubeSpec]) -> "BasisSpec":
        return BasisSpec(self.include_dyadic, self.extra_cubes + tuple(cubes))

    def to_json(self) -> dict:
        return {"include_dyadic": self.include_dyadic, "extra_cubes": [c.to_json() for c in self.extra_cubes]}

    @classmethod
    def from_json(cls, data: dict) -> "BasisSpec":
        return cls(bool(data.get("include_dyadic", True)), tuple(CubeSpec.from_json(c) for c in data.get("extra_cubes", [])))


def _dyadic_exponent(x: Fraction) -> int:
    d = x.denominator
    if d & (d - 1):
        raise NonDyadicBreakpoints(f"breakpoint {x} is not dyadic")
    return d.bit_length() - 1


def effective_shape(f: SimpleFunction) -> Tuple[int, int]:
    """(effective depth, finest dyadic exponent) of the breakpoints of f."""
    spec = f.grid_spec()
    depth = 0
    k = 0
    for i, b in enumerate(spec):
        for x in b:
            k = max(k, _dyadic_exponent(x))
        if len(b) > 2:
            depth = i + 1
    return depth, k


def stabilization_level(f: SimpleFunction) -> int:
    """Least m with l(m) >= depth(f) and all sides 2^-k, k >= finest exponent of f."""
    d, k = effective_shape(f)
    if d == 0:
        return 0
    m = (d - 1) ** 2 + 1 if d > 1 else 1
    while True:
        if nonfree_count(m) >= d and all(side_exponent(m, i) >= k for i in range(1, d + 1)):
            return m
        m += 1


def _check_caps(f: SimpleFunction, depth_cap: int, spacing_cap: Fraction):
    d, k = effective_shape(f)
    if d > depth_cap:
        raise DepthCapExceeded(f"depth {d} above cap {depth_cap}; use configuration closed forms")
    if Fraction(1, 1 << k) < spacing_cap:
        raise DepthCapExceeded(f"spacing 2^-{k} below cap {spacing_cap}; use configuration closed forms")


def _halve(arr: np.ndarray, axis: int) -> np.ndarray:
    """Average adjacent pairs of cells along an axis."""
    shape = arr.shape
    new = shape[:axis] + (shape[axis] // 2, 2) + shape[axis + 1:]
    return arr.reshape(new).sum(axis=axis + 1) / 2


def dyadic_maximal_grid(f: SimpleFunction, cell_cap: int = CELL_CAP):
    """Dyadic maximal function of |f| on the level-m* grid of its first coordinates."""
    d, _ = effective_shape(f)
    mstar = stabilization_level(f)
    exps = [side_exponent(mstar, i) for i in range(1, d + 1)]
    spec = tuple(tuple(Fraction(t, 1 << e) for t in range((1 << e) + 1)) for e in exps)
    if G.cell_count(spec) > cell_cap:
        raise DepthCapExceeded("dyadic refinement grid above the cell cap")
    g = f.abs()
    if g.depth > d:
        g = SimpleFunction.from_grid(*_truncate(g, d))
    _, base = g.to_grid(spec)
    levels = {mstar: base}
    cur = base
    for m in range(mstar, 0, -1):
        c = halved_coordinate(m)
        if c <= d:
            cur = _halve(cur, c - 1)
        levels[m - 1] = cur
    best = levels[0]
    for m in range(1, mstar + 1):
        c = halved_coordinate(m)
        if c <= d:
            best = np.repeat(best, 2, axis=c - 1)
            best = np.maximum(best, levels[m])
    return spec, best, mstar


def _truncate(g: SimpleFunction, d: int):
    """Drop trailing coordinates on which g does not depend."""
    spec, arr = g.to_grid()
    idx = (slice(None),) * d + (0,) * (g.depth - d)
    return spec[:d], arr[idx]


def cube_average(f_spec: G.GridSpec, f_vals: np.ndarray, cube: CubeSpec) -> Fraction:
    """Exact average of a grid function over a cube."""
    d = len(f_spec)
    vectors = []
    denom = ONE
    for i in range(d):
        if i < cube.nonfree:
            arc = cube.arcs()[i]
            vectors.append(G.overlap_lengths(f_spec[i], arc.pieces()))
            denom *= arc.length
        else:
            vectors.append(G.lengths(f_spec[i]))
    if d == 0:
        return Fraction(f_vals[()])
    total = sum((f_vals * G.outer_all(vectors)).ravel().tolist(), ZERO)
    return total / denom


def _cube_mask(spec: G.GridSpec, cube: CubeSpec) -> np.ndarray:
    masks = []
    arcs = cube.arcs()
    for i, b in enumerate(spec):
        if i < cube.nonfree:
            masks.append(G.arc_cell_mask(b, arcs[i].pieces()))
        else:
            masks.append(np.ones(len(b) - 1, dtype=bool))
    return G.outer_and(masks)


def _cube_breaks(cube: CubeSpec, i: int) -> List[Fraction]:
    if i >= cube.nonfree:
        return []
    pts = []
    for lo, hi in cube.arcs()[i].pieces():
        pts += [lo, hi]
    return pts


def maximal_grid(
    f: SimpleFunction,
    basis: BasisSpec,
    *,
    depth_cap: int = DEPTH_CAP,
    spacing_cap: Fraction = SPACING_CAP,
    cell_cap: int = CELL_CAP,
    extra_spec: G.GridSpec = (),
):
    """Mf as (grid spec, object array of exact values)."""
    g = f.abs()
    own_spec, own_vals = g.to_grid()
    if basis.include_dyadic:
        _check_caps(f, depth_cap, spacing_cap)
        dspec, dvals, _ = dyadic_maximal_grid(f, cell_cap)
    else:
        dspec = ()
        dvals = np.empty((), dtype=object)
        dvals[()] = ZERO
    depth = max([len(dspec), len(own_spec), len(extra_spec)] + [c.nonfree for c in basis.extra_cubes])
    out = []
    for i in range(depth):
        pts = set()
        for s in (dspec, own_spec, extra_spec):
            if i < len(s):
                pts.update(s[i])
        for c in basis.extra_cubes:
            pts.update(_cube_breaks(c, i))
        out.append(G.normalize_breaks(pts))
    spec = tuple(out)
    if G.cell_count(spec) > cell_cap:
        raise DepthCapExceeded("output refinement grid above the cell cap")
    vals = G.refine(dvals, dspec, spec)
    for c in basis.extra_cubes:
        avg = cube_average(own_spec, own_vals, c)
        if avg == 0:
            continue
        mask = _cube_mask(spec, c)
        vals = np.where(mask, np.maximum(vals, avg), vals)
    return spec, vals


def maximal_function(f: SimpleFunction, basis: BasisSpec, **caps) -> SimpleFunction:
    spec, vals = maximal_grid(f, basis, **caps)
    return SimpleFunction.from_grid(spec, vals)


def weak_type_quotient_q(
    f: SimpleFunction,
    q,
    basis: BasisSpec,
    w: Optional[SimpleFunction] = None,
    *,
    symbolic: bool = False,
    **caps,
):
    """weak_lq_norm_q(Mf) / lq_norm_q(f), a ratio of q-th powers."""
    q = as_fraction(q)
    strong = lq_norm_q(f, q, w) if not symbolic or q.denominator == 1 else None
    if strong is None:
        strong = _strong_symbolic(f, q, w)
    if strong == 0:
        raise ZeroFunction("the quotient is undefined for the zero function")
    mf = maximal_function(f, basis, **caps)
    weak = weak_lq_norm_q(mf, q, w, symbolic=symbolic)
    return weak / strong


def _strong_symbolic(f: SimpleFunction, q: Fraction, w):
    # only sums of a single level are exact products; f = c chi_E is the common case
    from .exact import PowerProduct
    from .simple import _level_measures

    levels = {v: m for v, m in _level_measures(f, w).items() if v != 0 and m != 0}
    if len(levels) > 1:
        return lq_norm_q(f, q, w)
    if not levels:
        return ZERO
    (v, m), = levels.items()
    return PowerProduct(m, [(v, q)])


def overlap_function(cubes: Sequence[CubeSpec], *, depth_cap: int = DEPTH_CAP, cell_cap: int = CELL_CAP) -> SimpleFunction:
    """sum of the indicators of the cubes."""
    depth = max((c.nonfree for c in cubes), default=0)
    if depth > depth_cap:
        raise DepthCapExceeded(f"overlap depth {depth} above cap {depth_cap}")
    spec = tuple(G.normalize_breaks(p for c in cubes for p in _cube_breaks(c, i)) for i in range(depth))
    if G.cell_count(spec) > cell_cap:
        raise DepthCapExceeded("overlap grid above the cell cap")
    vals = G.constant(spec, ZERO)
    for c in cubes:
        vals = vals + np.where(_cube_mask(spec, c), ONE, ZERO)
    return SimpleFunction.from_grid(spec, vals)


def max_value(f: SimpleFunction) -> Fraction:
    return max(f.values())
