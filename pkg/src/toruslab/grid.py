"""Rectilinear grids over the first few coordinates.

A grid is a tuple of sorted breakpoint tuples, one per coordinate, each
starting at 0 and ending at 1.  Cell values live in numpy object arrays of
Fractions, so arithmetic stays exact while indexing stays vectorized.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

import numpy as np

Breaks = Tuple[Fraction, ...]
GridSpec = Tuple[Breaks, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def normalize_breaks(points: Iterable[Fraction]) -> Breaks:
    s = set(points)
    s.add(ZERO)
    s.add(ONE)
    return tuple(sorted(x for x in s if 0 <= x <= 1))


def merge_specs(*specs: GridSpec) -> GridSpec:
    depth = max((len(s) for s in specs), default=0)
    out = []
    for i in range(depth):
        pts = set()
        for s in specs:
            if i < len(s):
                pts.update(s[i])
        out.append(normalize_breaks(pts))
    return tuple(out)


def shape_of(spec: GridSpec) -> Tuple[int, ...]:
    return tuple(len(b) - 1 for b in spec)


def cell_count(spec: GridSpec) -> int:
    n = 1
    for b in spec:
        n *= len(b) - 1
    return n


def lengths(b: Breaks) -> np.ndarray:
    return np.array([b[k + 1] - b[k] for k in range(len(b) - 1)], dtype=object)


def cell_volumes(spec: GridSpec) -> np.ndarray:
    vol = np.empty((), dtype=object)
    vol[()] = ONE
    for b in spec:
        vol = np.multiply.outer(vol, lengths(b))
    return vol


def constant(spec: GridSpec, value: Fraction) -> np.ndarray:
    arr = np.empty(shape_of(spec), dtype=object)
    arr.fill(value)
    return arr


def refine_index(old: Breaks, new: Breaks) -> np.ndarray:
    """For each cell of `new`, the index of the `old` cell containing it."""
    return np.array([bisect_right(old, new[k]) - 1 for k in range(len(new) - 1)], dtype=np.intp)


def refine(values: np.ndarray, old: GridSpec, new: GridSpec) -> np.ndarray:
    """Re-express cell values on a finer grid (extra coordinates broadcast)."""
    if len(new) < len(old):
        raise ValueError("refinement cannot drop coordinates")
    if not old:
        return constant(new, values[()])
    idx = [refine_index(o, n) for o, n in zip(old, new)]
    out = values[np.ix_(*idx)]
    extra = shape_of(new[len(old):])
    if extra:
        out = np.broadcast_to(out.reshape(out.shape + (1,) * len(extra)), out.shape + extra).copy()
    return out


def integral(values: np.ndarray, spec: GridSpec) -> Fraction:
    return sum((values * cell_volumes(spec)).ravel().tolist(), ZERO)


def arc_cell_mask(b: Breaks, pieces: Sequence[Tuple[Fraction, Fraction]]) -> np.ndarray:
    """Boolean mask of cells of one axis whose lower corner lies in the pieces.

    Valid when every piece endpoint is a breakpoint of the axis."""
    lows = b[:-1]
    mask = np.zeros(len(lows), dtype=bool)
    for lo, hi in pieces:
        for k, x in enumerate(lows):
            if lo <= x < hi:
                mask[k] = True
    return mask


def overlap_lengths(b: Breaks, pieces: Sequence[Tuple[Fraction, Fraction]]) -> np.ndarray:
    """Length of the intersection of each cell with a union of intervals."""
    out = []
    for k in range(len(b) - 1):
        lo, hi = b[k], b[k + 1]
        tot = ZERO
        for plo, phi in pieces:
            a = lo if lo > plo else plo
            c = hi if hi < phi else phi
            if a < c:
                tot += c - a
        out.append(tot)
    return np.array(out, dtype=object)


def outer_all(vectors: List[np.ndarray]) -> np.ndarray:
    acc = np.empty((), dtype=object)
    acc[()] = ONE
    for v in vectors:
        acc = np.multiply.outer(acc, v)
    return acc


def outer_and(masks: List[np.ndarray]) -> np.ndarray:
    acc = np.ones((), dtype=bool)
    for v in masks:
        acc = np.logical_and.outer(acc, v)
    return acc
