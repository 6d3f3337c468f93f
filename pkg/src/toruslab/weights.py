"""Weight constants over finite cube families and the weighted blow-up.

Every constant here is a maximum over a finite family, hence a lower bound
for the supremum over the whole basis.  Integrals of piecewise constant
weights are exact; only fractional powers are taken in floats.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .basis import CubeSpec, cube_region, nonfree_count
from .configurations import SequencePlan, _relative_weight, blowup_quotient_closed, excess_ratio_sum, minimal_N
from .errors import InvalidN, NonIntegrableDual, RangeEmpty, ValidationError
from .exact import PowerProduct, as_fraction, frac_pair, rational_above, rational_below
from .maximal import BasisSpec, maximal_function, maximal_grid
from .simple import SimpleFunction, WeightFn
from .torus import ONE, ZERO, Arc, Box, Region, region_intersect


class CubeFamily:
    """Finite, deduplicated list of cubes."""

    def __init__(self, cubes: Iterable[CubeSpec]):
        seen = set()
        out = []
        for c in cubes:
            key = (c.m, c.translation)
            if key not in seen:
                seen.add(key)
                out.append(c)
        if not out:
            raise ValidationError("a cube family must be nonempty")
        self.cubes: Tuple[CubeSpec, ...] = tuple(out)

    def __iter__(self):
        return iter(self.cubes)

    def __len__(self):
        return len(self.cubes)

    def non_dyadic(self) -> List[CubeSpec]:
        return [c for c in self.cubes if not c.dyadic]

    def to_json(self) -> dict:
        return {"cubes": [c.to_json() for c in self.cubes]}

    @classmethod
    def from_json(cls, data: dict) -> "CubeFamily":
        return cls(CubeSpec.from_json(c) for c in data["cubes"])


def default_family(max_level: int = 8, shift_den: int = 16, shift_depth: Optional[int] = None) -> CubeFamily:
    """Cubes of sizelevel <= max_level translated by multiples of 1/shift_den.

    Only the first `shift_depth` nonfree coordinates are shifted; the others
    stay at 0.  This contains every dyadic cube of those levels whose
    translation vanishes beyond `shift_depth`."""
    cubes = []
    for m in range(max_level + 1):
        ell = nonfree_count(m)
        d = ell if shift_depth is None else min(ell, shift_depth)
        offsets = [Fraction(k, shift_den) for k in range(shift_den)]
        for head in product(offsets, repeat=d):
            cubes.append(CubeSpec(m, tuple(head) + (ZERO,) * (ell - d)))
    return CubeFamily(cubes)


def dyadic_family(max_level: int) -> CubeFamily:
    from .basis import dyadic_cubes

    return CubeFamily(c for m in range(max_level + 1) for c in dyadic_cubes(m))


def shifted_level_family(m: int, shift_den: int, coordinate: int = 1) -> CubeFamily:
    """Level-m cubes shifted by k/shift_den in one coordinate only."""
    ell = nonfree_count(m)
    cubes = []
    for k in range(shift_den):
        t = [ZERO] * ell
        t[coordinate - 1] = Fraction(k, shift_den)
        cubes.append(CubeSpec(m, tuple(t)))
    return CubeFamily(cubes)


# per-cube data -------------------------------------------------------------------

def _projected_region(Q: CubeSpec, depth: int) -> Region:
    """Q restricted to the first `depth` coordinates (all a weight of that depth sees)."""
    arcs = []
    for i in range(depth):
        if i < Q.nonfree:
            arcs.append(Arc(Q.translation[i], Q.side(i + 1)))
        else:
            arcs.append(Arc.full())
    return Region(depth, [Box(tuple(arcs))], check=False)


def level_distribution(w: SimpleFunction, region: Region) -> Dict[Fraction, Fraction]:
    """value -> measure of {w = value} inside the region."""
    out: Dict[Fraction, Fraction] = {}
    covered = ZERO
    for r, v in w.pieces:
        part = region_intersect(r, region)
        if part.is_empty():
            continue
        mu = part.measure()
        out[v] = out.get(v, ZERO) + mu
        covered += mu
    rest = region.measure() - covered
    if rest:
        out[w.default] = out.get(w.default, ZERO) + rest
    return out


class _CubeCache:
    """Relative level distributions of w on cubes, keyed by what w can see."""

    def __init__(self, w: SimpleFunction):
        self.w = w
        self._memo: Dict[tuple, Dict[Fraction, Fraction]] = {}

    def relative(self, Q: CubeSpec) -> Dict[Fraction, Fraction]:
        d = self.w.depth
        key = (tuple(Q.side(i + 1) for i in range(min(d, Q.nonfree))), Q.translation[:d])
        hit = self._memo.get(key)
        if hit is None:
            reg = _projected_region(Q, d)
            size = reg.measure()
            hit = {v: mu / size for v, mu in level_distribution(self.w, reg).items()}
            self._memo[key] = hit
        return hit


def _avg(dist: Dict[Fraction, Fraction]) -> Fraction:
    return sum((v * mu for v, mu in dist.items()), ZERO)


def ap_constant(w: WeightFn, p, F: CubeFamily):
    """max over F of avg(w) * avg(w^(1-p'))^(p-1); exact (Fraction) when p = 2."""
    cache = _CubeCache(w)
    exact = False
    try:
        p = as_fraction(p)
        exact = p == 2
    except ValidationError:
        p = float(p)
    if p <= 1:
        raise ValidationError("A_p needs p > 1")
    best = None
    for Q in F:
        dist = cache.relative(Q)
        if any(v <= 0 for v in dist):
            raise NonIntegrableDual("w^(1-p') is not integrable on a cube")
        if exact:
            val = _avg(dist) * sum((mu / v for v, mu in dist.items()), ZERO)
        else:
            pf = float(p)
            dual = 1 - pf / (pf - 1)
            val = float(_avg(dist)) * sum(float(v) ** dual * float(mu) for v, mu in dist.items()) ** (pf - 1)
        if best is None or val > best:
            best = val
    return best


def rh_constant(w: WeightFn, r, F: CubeFamily) -> float:
    """max over F of avg(w^r)^(1/r) / avg(w)."""
    rf = float(r)
    if rf <= 1:
        raise ValidationError("RH_r needs r > 1")
    cache = _CubeCache(w)
    best = 0.0
    for Q in F:
        dist = cache.relative(Q)
        num = math.fsum(float(v) ** rf * float(mu) for v, mu in dist.items()) ** (1 / rf)
        best = max(best, num / float(_avg(dist)))
    return best


def _effective_basis(F: Optional[CubeFamily], basis: BasisSpec) -> BasisSpec:
    if F is None:
        return basis
    return basis.with_cubes(F.non_dyadic())


def a1_constant(w: WeightFn, F: Optional[CubeFamily] = None, basis: BasisSpec = BasisSpec(), **caps) -> Fraction:
    """ess sup of M w / w over the refinement grid, M taken over basis and F."""
    b = _effective_basis(F, basis)
    spec, mvals = maximal_grid(w, b, **caps)
    _, wvals = w.to_grid(spec)
    return max(x / y for x, y in zip(mvals.ravel().tolist(), wvals.ravel().tolist()))


def fw_ainfty_estimate(w: WeightFn, F: CubeFamily, basis: BasisSpec = BasisSpec(), **caps) -> Fraction:
    """max over Q in F of (1/w(Q)) * integral_Q M(w chi_Q)."""
    b = _effective_basis(F, basis)
    best = ZERO
    for Q in F:
        R = cube_region(Q)
        g = w.restrict(R)
        mg = maximal_function(g, b, **caps)
        val = mg.integral_over(R) / w.measure(R)
        best = max(best, val)
    return best


# comparability ------------------------------------------------------------------

@dataclass
class ComparabilityFit:
    delta: Fraction
    C: Fraction
    direction: str
    N: int
    samples: List[Tuple[Fraction, Fraction]] = field(default_factory=list)

    def holds(self, s: Fraction, u: Fraction) -> bool:
        """The fitted inequality for one sample (|E|/|Q|, w(E)/w(Q))."""
        if self.direction == "RH":
            return u <= self.C * PowerProduct(1, [(s, self.delta)]) if s > 0 else u == 0
        return s <= self.C * PowerProduct(1, [(u, self.delta)]) if u > 0 else s == 0

    def verify(self) -> bool:
        return all(self.holds(s, u) for s, u in self.samples)

    def to_json(self) -> dict:
        return {"delta": frac_pair(self.delta), "C": frac_pair(self.C), "direction": self.direction, "N": self.N,
                "samples": [[frac_pair(s), frac_pair(u)] for s, u in self.samples]}


def extremal_samples(dist: Dict[Fraction, Fraction], direction: str = "RH") -> List[Tuple[Fraction, Fraction]]:
    """(|E|/|Q|, w(E)/w(Q)) at the breakpoints of the extremal rearrangement.

    Heaviest values first for the RH side, lightest first for the A_p side;
    between breakpoints the quotient has no interior maximum."""
    total = _avg(dist)
    vals = sorted(dist, reverse=(direction == "RH"))
    out = []
    s = u = ZERO
    for v in vals:
        s += dist[v]
        u += v * dist[v] / total
        out.append((s, u))
    return out


def _random_subbox(rng: random.Random, Q: CubeSpec, depth: int, den: int = 64) -> Region:
    arcs = []
    for i in range(depth):
        if i < Q.nonfree:
            start, length = Q.translation[i], Q.side(i + 1)
        else:
            start, length = ZERO, ONE
        a = rng.randrange(den)
        b = rng.randrange(a + 1, den + 1)
        arcs.append(Arc((start + length * Fraction(a, den)) % 1, length * Fraction(b - a, den)))
    return Region(depth, [Box(tuple(arcs))], check=False)


def _fit_constant(samples, delta: Fraction, direction: str) -> PowerProduct:
    best = PowerProduct(0)
    for s, u in samples:
        if direction == "RH":
            if s == 0:
                continue
            cand = PowerProduct(u, [(s, -delta)])
        else:
            if u == 0:
                continue
            cand = PowerProduct(s, [(u, -delta)])
        if cand > best:
            best = cand
    return best


def comparability_fit(
    w: WeightFn,
    F: CubeFamily,
    samples_per_cube: int = 4,
    *,
    direction: str = "RH",
    deltas: Optional[Sequence[Fraction]] = None,
    seed: int = 0,
) -> ComparabilityFit:
    """Fit w(E)/w(Q) <= C (|E|/|Q|)^delta (RH side) or |E|/|Q| <= C (w(E)/w(Q))^rho (A_p side).

    Samples are the extremal sets of every cube plus random sub-boxes.  For
    each delta on the grid the smallest C valid for all samples is found
    exactly and rounded up to a rational; the pair with the smallest
    admissible N (C N^-delta < 1) wins, ties going to the larger delta."""
    if direction not in ("RH", "Ap"):
        raise ValidationError("direction must be 'RH' or 'Ap'")
    deltas = [Fraction(k, 20) for k in range(1, 21)] if deltas is None else [as_fraction(d) for d in deltas]
    rng = random.Random(seed)
    cache = _CubeCache(w)
    samples = set()
    for Q in F:
        dist = cache.relative(Q)
        samples.update(extremal_samples(dist, direction))
        reg = _projected_region(Q, w.depth)
        wq = w.measure(reg)
        size = reg.measure()
        for _ in range(samples_per_cube if w.depth else 0):
            E = _random_subbox(rng, Q, w.depth)
            samples.add((E.measure() / size, w.measure(E) / wq))
    samples = sorted(samples)
    best = None
    for d in deltas:
        C = rational_above(_fit_constant(samples, d, direction))
        C = max(C, ONE)
        N = minimal_N(C, d)
        key = (N, -d, C)
        if best is None or key < best[0]:
            best = (key, d, C, N)
    _, d, C, N = best
    return ComparabilityFit(d, C, direction, N, samples)


# sharp reverse Hoelder ----------------------------------------------------------

@dataclass
class RHRow:
    r: Fraction
    constant: Optional[Fraction]
    worst_ratio: Optional[float]
    violations: int
    skipped: str = ""


@dataclass
class SharpRHReport:
    ainfty: Fraction
    r_max: float
    rows: List[RHRow]

    @property
    def range_empty(self) -> bool:
        return not any(row.constant is not None for row in self.rows)

    @property
    def violations(self) -> int:
        return sum(row.violations for row in self.rows)


def sharp_rh_constant(a: Fraction, r: Fraction) -> Optional[Fraction]:
    """a (r'-1) / (r'-1 - 2(a-1)); None when the denominator is not positive."""
    rp1 = 1 / (r - 1)  # r' - 1
    den = rp1 - 2 * (a - 1)
    if den <= 0:
        return None
    return a * rp1 / den


def sharp_rh_check(
    w: WeightFn,
    F: CubeFamily,
    basis: BasisSpec = BasisSpec(),
    r_grid: Sequence = (Fraction(11, 10), Fraction(3, 2), Fraction(2)),
    *,
    fw_family: Optional[CubeFamily] = None,
    rel_tol: float = 1e-12,
    strict: bool = False,
    **caps,
) -> SharpRHReport:
    """avg_Q(w^r) <= C_{a,r} avg_Q(w)^r on F, a the Fujii-Wilson estimate."""
    a = fw_ainfty_estimate(w, fw_family or F, basis, **caps)
    r_max = math.inf if a == 1 else 1 + 1 / float(a - 1)
    cache = _CubeCache(w)
    rows = []
    for r in r_grid:
        r = as_fraction(r)
        if r <= 1:
            rows.append(RHRow(r, None, None, 0, "r <= 1"))
            continue
        if a > 1 and not r < 1 + 1 / (a - 1):
            rows.append(RHRow(r, None, None, 0, "outside the admissible range"))
            continue
        C = sharp_rh_constant(a, r)
        if C is None:
            rows.append(RHRow(r, None, None, 0, "constant undefined (nonpositive denominator)"))
            continue
        rf = float(r)
        worst = 0.0
        bad = 0
        for Q in F:
            dist = cache.relative(Q)
            lhs = math.fsum(float(v) ** rf * float(mu) for v, mu in dist.items())
            rhs = float(C) * float(_avg(dist)) ** rf
            ratio = lhs / rhs
            worst = max(worst, ratio)
            if ratio > 1 + rel_tol:
                bad += 1
        rows.append(RHRow(r, C, worst, bad))
    rep = SharpRHReport(a, r_max, rows)
    if strict and rep.range_empty:
        raise RangeEmpty(f"no r in the grid is admissible for the estimate {a}")
    return rep


# weighted blow-up -------------------------------------------------------------

@dataclass
class WeightedRow:
    j: int
    N: int
    l: int
    sizelevel: int
    w_avg_Q: Fraction
    excess_sum: Fraction
    min_exit_ratio: Fraction
    min_chain_ratio: Fraction
    threshold: float
    realized: object
    bound: float
    chain_ok: bool
    bound_ok: bool

    def to_json(self) -> dict:
        realized = self.realized.to_json() if isinstance(self.realized, PowerProduct) else frac_pair(self.realized)
        return {"j": self.j, "N": self.N, "l": self.l, "sizelevel": self.sizelevel,
                "w_avg_Q": frac_pair(self.w_avg_Q), "excess_sum": frac_pair(self.excess_sum),
                "min_exit_ratio": frac_pair(self.min_exit_ratio), "min_chain_ratio": frac_pair(self.min_chain_ratio),
                "realized": realized}


def _chain_ratios(w, Q: CubeSpec, N: int, k: int) -> List[Fraction]:
    """w(Q_{n+1}) / w(Q_n), Q_n = Q shifted by n/N of its side in coordinate k."""
    s = Q.side(k)
    t = Q.translation[k - 1]
    rel = [_relative_weight(w, Q, {k: (t + Fraction(n, N) * s, s)}) for n in range(N)]
    return [rel[n + 1] / rel[n] for n in range(N - 1)]


def _exit_ratio(w, Q: CubeSpec, N: int, k: int) -> Fraction:
    """w(Q^(k) minus Q) / w(Q^(k))."""
    s = Q.side(k)
    t = Q.translation[k - 1]
    whole = _relative_weight(w, Q, {k: (t + Fraction(N - 1, N) * s, s)})
    excess = _relative_weight(w, Q, {k: (t + s, Fraction(N - 1, N) * s)})
    return excess / whole


def weighted_blowup(plan: SequencePlan, w: Optional[WeightFn], q, C=None, delta=None,
                    fit: Optional[ComparabilityFit] = None) -> List[WeightedRow]:
    """Chain ratios, realized weighted quotient powers and the lower bound per plan entry."""
    if plan.kind != "thm1.6":
        raise ValidationError("weighted_blowup needs a thm1.6 plan")
    if fit is not None:
        C, delta = fit.C, fit.delta
    if C is None or delta is None:
        C, delta = plan.params["C"], plan.params["delta"]
    C, delta, q = as_fraction(C), as_fraction(delta), as_fraction(q)
    Nmin = minimal_N(C, delta)
    depth = 0 if w is None else w.depth
    rows = []
    for e in plan.entries:
        N = e.N
        if N is None or N < Nmin:
            raise InvalidN(f"N_j = {N} below the minimal N = {Nmin}")
        Q = e.anchor
        x = C * PowerProduct(1, [(N, -delta)])
        seen = min(e.l, depth)
        exits = [_exit_ratio(w, Q, N, k) for k in range(1, seen + 1)]
        chains = [r for k in range(1, seen + 1) for r in _chain_ratios(w, Q, N, k)]
        if e.l > seen:
            exits.append(Fraction(N - 1, N))
            chains.append(ONE)
        min_exit, min_chain = min(exits), min(chains)
        chain_ok = (1 - min_chain) <= x and (1 - min_exit) <= x
        cfg = e.configuration()
        realized = blowup_quotient_closed(cfg, "chi_Q", q, w)
        excess = excess_ratio_sum(w, Q, cfg.epsilon, e.l)
        # exact check against an upper estimate of the bound: x_lo <= x makes (1 - x_lo)^N larger
        x_lo = rational_below(x)
        bound_hi = PowerProduct((1 - x_lo) ** N * e.l, [(2 * N, -q)]) if x_lo < 1 else PowerProduct(0)
        bound_ok = PowerProduct._lift(realized) >= bound_hi
        bound = max(0.0, 1 - float(x)) ** N * e.l / (2 * N) ** float(q)
        w_avg = _relative_weight(w, Q, {}) if depth == 0 else _cube_average(w, Q)
        rows.append(WeightedRow(e.j, N, e.l, e.sizelevel, w_avg, excess, min_exit, min_chain, float(x),
                                realized, bound, chain_ok, bound_ok))
    return rows


def _cube_average(w: SimpleFunction, Q: CubeSpec) -> Fraction:
    reg = _projected_region(Q, w.depth)
    return w.integral_over(reg) / reg.measure()
