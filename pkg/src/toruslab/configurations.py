"""(eps, l)-configurations, their validation, closed-form blow-up quotients
and the sequence plans used for the unboundedness experiments.

Closed forms work with measures relative to the anchor cube, so they never
form |Q| = 2^-m and stay cheap for cubes with thousands of nonfree
coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .basis import CubeSpec, cube_region, nonfree_count, side_exponent
from .errors import CapExceeded, EpsilonOutOfRange, InfeasibleAnchor, TooManyCubes, ValidationError
from .exact import PowerProduct, as_fraction, floor_power, frac_pair, to_exact
from .simple import SimpleFunction, weight_measure
from .torus import ONE, ZERO, Arc, Box, Region, region_intersect, region_subtract

PARTITION_CAP = 12
SIZELEVEL_CAP = 10 ** 12

KINDS = ("thm1.2", "cor1.3", "cor1.5-closed", "cor1.5-open", "thm1.6")


def shifted_cube(Q: CubeSpec, shift: Fraction, k: int) -> CubeSpec:
    """Q translated by shift * side_k in coordinate k (1-based)."""
    t = list(Q.translation)
    t[k - 1] = (t[k - 1] + shift * Q.side(k)) % 1
    return CubeSpec(Q.m, tuple(t))


class _ShiftedCubes(Sequence):
    """Lazy list of the cubes of a configuration around Q."""

    def __init__(self, Q: CubeSpec, epsilon: Fraction, l: int):
        self.Q, self.epsilon, self.l = Q, epsilon, l

    def __len__(self):
        return self.l

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(self.l))]
        if not -self.l <= i < self.l:
            raise IndexError(i)
        i %= self.l
        return shifted_cube(self.Q, 1 - self.epsilon, i + 1)


class Configuration:
    """Anchor set A, cubes Q^(1..l) and the overlap parameter eps."""

    def __init__(self, anchor: Optional[Region], cubes: Sequence[CubeSpec], epsilon, l: Optional[int] = None,
                 around: Optional[CubeSpec] = None):
        self._anchor = anchor
        self.cubes = cubes
        self.epsilon = as_fraction(epsilon)
        self.l = len(cubes) if l is None else l
        self.around = around
        if anchor is None and around is None:
            raise ValidationError("a configuration needs an anchor")

    @property
    def anchor(self) -> Region:
        if self._anchor is None:
            self._anchor = cube_region(self.around)
        return self._anchor

    def with_anchor(self, anchor: Region) -> "Configuration":
        return Configuration(anchor, list(self.cubes), self.epsilon, self.l)


def make_config_around(Q: CubeSpec, epsilon, l: int) -> Configuration:
    eps = as_fraction(epsilon)
    if not (0 < eps <= Fraction(1, 2)):
        raise EpsilonOutOfRange(f"epsilon {eps} outside (0, 1/2]")
    if l < 1:
        raise ValidationError("l must be at least 1")
    if l > Q.nonfree:
        raise TooManyCubes(f"l = {l} exceeds the {Q.nonfree} nonfree coordinates of the cube")
    return Configuration(None, _ShiftedCubes(Q, eps, l), eps, l, around=Q)


@dataclass
class Check:
    name: str
    lhs: Fraction
    rhs: Fraction
    relation: str
    ok: bool


@dataclass
class ConfigReport:
    checks: List[Check] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.ok]


def validate_config(c: Configuration) -> ConfigReport:
    """Equal measures, overlap fractions in [eps, 1-eps], disjoint excess sets."""
    rep = ConfigReport()
    A = c.anchor
    a = A.measure()
    eps = c.epsilon
    regions = [cube_region(q) for q in c.cubes]
    excess = []
    for k, R in enumerate(regions, start=1):
        rep.checks.append(Check(f"|Q{k}| = |A|", R.measure(), a, "=", R.measure() == a))
        ov = region_intersect(R, A).measure()
        rep.checks.append(Check(f"eps|A| <= |Q{k} n A|", eps * a, ov, "<=", a > 0 and eps * a <= ov))
        rep.checks.append(Check(f"|Q{k} n A| <= (1-eps)|A|", ov, (1 - eps) * a, "<=", a > 0 and ov <= (1 - eps) * a))
        excess.append(region_subtract(R, A))
    for i, k in combinations(range(len(excess)), 2):
        m = region_intersect(excess[i], excess[k]).measure()
        rep.checks.append(Check(f"|(Q{i + 1}\\A) n (Q{k + 1}\\A)| = 0", m, ZERO, "=", m == 0))
    return rep


def sparse_check(c: Configuration) -> bool:
    """Excess sets pairwise disjoint and each of measure at least eps|Q^(k)|."""
    A = c.anchor
    excess = [region_subtract(cube_region(q), A) for q in c.cubes]
    for q, e in zip(c.cubes, excess):
        if e.measure() < c.epsilon * q.measure():
            return False
    return all(region_intersect(excess[i], excess[k]).measure() == 0 for i, k in combinations(range(len(excess)), 2))


def inclusion_partition(c: Configuration, m: Optional[int] = None) -> List[Tuple[int, Fraction]]:
    """Measures of the parts of Q covered by exactly 0..m of the first m cubes."""
    if c.around is None:
        raise ValidationError("inclusion_partition needs a configuration around a cube")
    m = c.l if m is None else m
    if m > PARTITION_CAP:
        raise CapExceeded(f"m = {m} above the partition cap {PARTITION_CAP}")
    parts: List[Tuple[int, Region]] = [(0, c.anchor)]
    for k in range(m):
        R = cube_region(c.cubes[k])
        nxt = []
        for count, reg in parts:
            inside = region_intersect(reg, R)
            outside = region_subtract(reg, R)
            if not inside.is_empty():
                nxt.append((count + 1, inside))
            if not outside.is_empty():
                nxt.append((count, outside))
        parts = nxt
    totals = [ZERO] * (m + 1)
    for count, reg in parts:
        totals[count] += reg.measure()
    return list(enumerate(totals))


# closed forms ------------------------------------------------------------

def _relative_weight(w: Optional[SimpleFunction], Q: CubeSpec, overrides: Dict[int, Tuple[Fraction, Fraction]]) -> Fraction:
    """w(B)/w(Q) where B is Q with the arcs of some coordinates replaced.

    Coordinates the weight does not see contribute plain length ratios; the
    rest is an exact region integral over the first depth(w) coordinates."""
    depth = 0 if w is None else w.depth
    ratio = ONE
    for k, (_, length) in overrides.items():
        if k > depth:
            ratio *= length / Q.side(k)
    if depth == 0:
        return ratio
    q_arcs = []
    b_arcs = []
    for i in range(1, depth + 1):
        if i <= Q.nonfree:
            arc = Arc(Q.translation[i - 1], Q.side(i))
        else:
            arc = Arc.full()
        q_arcs.append(arc)
        if i in overrides:
            start, length = overrides[i]
            b_arcs.append(Arc(start % 1, length))
        else:
            b_arcs.append(arc)
    wq = weight_measure(w, Region(depth, [Box(tuple(q_arcs))], check=False))
    wb = weight_measure(w, Region(depth, [Box(tuple(b_arcs))], check=False))
    return ratio * wb / wq


def excess_ratio(w: Optional[SimpleFunction], Q: CubeSpec, epsilon: Fraction, k: int) -> Fraction:
    """w(Q^(k) minus Q) / w(Q) for the configuration around Q."""
    s = Q.side(k)
    return _relative_weight(w, Q, {k: (Q.translation[k - 1] + s, (1 - epsilon) * s)})


def excess_ratio_sum(w: Optional[SimpleFunction], Q: CubeSpec, epsilon: Fraction, l: int) -> Fraction:
    depth = 0 if w is None else w.depth
    seen = min(l, depth)
    total = (l - seen) * (1 - epsilon)
    for k in range(1, seen + 1):
        total += excess_ratio(w, Q, epsilon, k)
    return total


def intersection_ratio(w: Optional[SimpleFunction], Q: CubeSpec, epsilon: Fraction, l: int) -> Fraction:
    """w(U)/w(Q) with U the intersection of all cubes of the configuration."""
    depth = 0 if w is None else w.depth
    seen = min(l, depth)
    overrides = {}
    for k in range(1, seen + 1):
        s = Q.side(k)
        overrides[k] = (Q.translation[k - 1] + (1 - epsilon) * s, epsilon * s)
    return epsilon ** (l - seen) * _relative_weight(w, Q, overrides)


def blowup_quotient_closed(c: Configuration, testfn: str, q, w: Optional[SimpleFunction] = None):
    """q-th power of the weak-type quotient seen by the configuration cubes and Q.

    Returns a Fraction when rational, otherwise an exact PowerProduct."""
    if c.around is None:
        raise ValidationError("closed forms need a configuration around a cube")
    q = as_fraction(q)
    eps = c.epsilon
    Q = c.around
    excess = excess_ratio_sum(w, Q, eps, c.l)
    if testfn in ("chi_Q", "chi_A"):
        # level 1 on Q, level eps on the excess sets
        cands = [PowerProduct(1), PowerProduct(1 + excess, [(eps, q)])]
    elif testfn == "chi_intersection":
        rho = intersection_ratio(w, Q, eps, c.l)
        cands = [PowerProduct(1), PowerProduct((1 + excess) / rho, [(eps, c.l * q)])]
    else:
        raise ValidationError(f"unknown test function {testfn!r}")
    return to_exact(max(cands))


def eps2_bound_power(epsilon, l: int, q):
    """(1/2)^q eps^(q+1) l."""
    eps, q = as_fraction(epsilon), as_fraction(q)
    return to_exact(PowerProduct(l * eps, [(Fraction(1, 2), q), (eps, q)]))


def chi_q_bound_power(epsilon, l: int, q):
    """(eps l^(1/q) / 2^(1+1/q))^q = eps^q l / 2^(q+1)."""
    eps, q = as_fraction(epsilon), as_fraction(q)
    return to_exact(PowerProduct(Fraction(l, 2), [(eps, q), (Fraction(1, 2), q)]))


def intersection_bound(l: int) -> Fraction:
    """Lower bound l/4 for the intersection test function at q = 1."""
    return Fraction(l, 4)


def test_function(c: Configuration, testfn: str) -> SimpleFunction:
    """The test function as an explicit SimpleFunction (small depth only)."""
    if testfn in ("chi_Q", "chi_A"):
        return SimpleFunction.indicator(c.anchor)
    if testfn == "chi_intersection":
        U = c.anchor
        for q in c.cubes:
            U = region_intersect(U, cube_region(q))
        return SimpleFunction.indicator(U)
    raise ValidationError(f"unknown test function {testfn!r}")


# sequence plans --------------------------------------------------------------

@dataclass(frozen=True)
class PlanEntry:
    j: int
    epsilon: Fraction
    l: int
    N: Optional[int]
    anchor: CubeSpec

    @property
    def sizelevel(self) -> int:
        return self.anchor.m

    def configuration(self) -> Configuration:
        return make_config_around(self.anchor, self.epsilon, self.l)

    def to_json(self) -> dict:
        return {"j": self.j, "epsilon": frac_pair(self.epsilon), "l": self.l, "N": self.N,
                "sizelevel": self.anchor.m, "anchor": self.anchor.to_json()}

    @classmethod
    def from_json(cls, d: dict) -> "PlanEntry":
        return cls(int(d["j"]), as_fraction(d["epsilon"]), int(d["l"]), d.get("N"), CubeSpec.from_json(d["anchor"]))


@dataclass
class SequencePlan:
    kind: str
    params: dict
    entries: List[PlanEntry]
    layout_level: int

    def to_json(self) -> dict:
        params = {k: (frac_pair(v) if isinstance(v, Fraction) else v) for k, v in self.params.items()}
        return {"kind": self.kind, "params": params, "layout_level": self.layout_level,
                "entries": [e.to_json() for e in self.entries]}

    @classmethod
    def from_json(cls, d: dict) -> "SequencePlan":
        params = {k: (as_fraction(v) if isinstance(v, list) else v) for k, v in d.get("params", {}).items()}
        return cls(d["kind"], params, [PlanEntry.from_json(e) for e in d["entries"]], int(d.get("layout_level", 0)))


def minimal_N(C, delta) -> int:
    """Smallest positive integer N with C N^-delta < 1, decided exactly."""
    C, delta = as_fraction(C), as_fraction(delta)
    if not (0 < delta <= 1) or C <= 0:
        raise ValidationError("need C > 0 and delta in (0, 1]")
    a, b = delta.numerator, delta.denominator
    # C N^(-a/b) < 1  <=>  N^a > C^b
    target = C ** b
    N = max(1, math.floor(float(C) ** (1 / float(delta))) if float(C) < 1e300 else 1)
    while N > 1 and Fraction(N - 1) ** a > target:
        N -= 1
    while not Fraction(N) ** a > target:
        N += 1
    return N


def plan_parameters(kind: str, j: int, params: dict) -> Tuple[Fraction, int, Optional[int]]:
    """(eps_j, l_j, N_j) for one index."""
    if kind in ("thm1.2", "cor1.3"):
        return Fraction(1, 2), j, None
    if kind == "cor1.5-closed":
        q0 = as_fraction(params["q0"])
        return Fraction(1, j + 1), floor_power(j, q0), None
    if kind == "cor1.5-open":
        q0 = as_fraction(params["q0"])
        return Fraction(1, j + 1), math.floor(math.log(j + 2) * float(j) ** float(q0)), None
    if kind == "thm1.6":
        N = minimal_N(params["C"], params["delta"])
        Nj = int(params.get("N_j", N))
        if Nj < N:
            from .errors import InvalidN

            raise InvalidN(f"N_j = {Nj} below the minimal N = {N}")
        l = int(params.get("l", 0)) or j
        return Fraction(1, Nj), l, Nj
    raise ValidationError(f"unknown plan kind {kind!r}")


def _cell_translation(L: int, index: int) -> Tuple[Fraction, ...]:
    t = []
    for i in range(1, nonfree_count(L) + 1):
        k = side_exponent(L, i)
        index, digit = divmod(index, 1 << k)
        t.append(Fraction(digit, 1 << k))
    return tuple(t)


def anchor_level(L: int, l: int, cap: int = SIZELEVEL_CAP) -> int:
    """Least level m > L whose cubes have l nonfree coordinates and fit, with
    their shifts, inside a cell of level L."""
    m = max(L + 1, (l - 1) ** 2 + 1 if l > 1 else 1)
    ell_L = nonfree_count(L)
    while m <= cap:
        if nonfree_count(m) >= l and all(side_exponent(m, i) > side_exponent(L, i) for i in range(1, ell_L + 1)):
            return m
        m += 1
    raise InfeasibleAnchor(f"no anchor level below the sizelevel cap {cap}")


def build_sequence(kind: str, params: dict, j_range: Sequence[int], *, sizelevel_cap: int = SIZELEVEL_CAP) -> SequencePlan:
    """Anchors in distinct cells of a common coarse level, so the sets E_j are disjoint."""
    js = list(j_range)
    if not js:
        raise ValidationError("empty plan")
    if kind not in KINDS:
        raise ValidationError(f"unknown plan kind {kind!r}")
    L = 0
    while (1 << L) < len(js):
        L += 1
    entries = []
    for idx, j in enumerate(js):
        if j < 1:
            raise ValidationError("plan indices start at 1")
        eps, l, N = plan_parameters(kind, j, params)
        m = anchor_level(L, l, sizelevel_cap)
        corner = _cell_translation(L, idx)
        t = corner + (ZERO,) * (nonfree_count(m) - len(corner))
        entries.append(PlanEntry(j, eps, l, N, CubeSpec(m, t, True)))
    return SequencePlan(kind, dict(params), entries, L)


def configuration_region(c: Configuration) -> Region:
    """E = Q together with all cubes of the configuration (small depth only)."""
    E = c.anchor
    for q in c.cubes:
        R = cube_region(q)
        E = Region.from_raw(max(E.depth, R.depth), E.promote(max(E.depth, R.depth)).raw_boxes
                            + region_subtract(R, E).raw_boxes)
    return E
