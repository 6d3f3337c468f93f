"""Acceptance suites shared by the test-suite and the `selftest` command.

Each suite returns a SuiteResult whose `lines` are deterministic text (no
timings), so two runs can be compared byte for byte.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import sympy as sp

from . import binomial as B
from .basis import CubeSpec, cube_region, dyadic_cubes, fundamental_domain, locate, nonfree_count
from .configurations import (
    blowup_quotient_closed,
    build_sequence,
    chi_q_bound_power,
    eps2_bound_power,
    intersection_bound,
    make_config_around,
    test_function,
    validate_config,
)
from .exact import PowerProduct
from .maximal import BasisSpec, maximal_function, weak_type_quotient_q
from .periodize import (
    LineWeight,
    PeriodizedWeight,
    check_perio_a1,
    check_perio_rh,
    default_interval_family,
    line_integral,
    periodize_integral,
    periodize_integral_alt,
    staircase,
)
from .simple import SimpleFunction, StepFactor, WeightFn, average, tensor_weight
from .torus import Arc, Box, Point, Region, region_intersect
from .weights import (
    CubeFamily,
    a1_constant,
    ap_constant,
    comparability_fit,
    default_family,
    dyadic_family,
    fw_ainfty_estimate,
    rh_constant,
    sharp_rh_check,
    shifted_level_family,
    weighted_blowup,
)


@dataclass
class SuiteResult:
    number: int
    name: str
    passed: bool
    lines: List[str] = field(default_factory=list)

    def summary(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.name}"

    def render(self) -> str:
        return "\n".join([self.summary()] + ["    " + s for s in self.lines])


def _fmt(x) -> str:
    if isinstance(x, PowerProduct):
        return f"{float(x):.12g}"
    if isinstance(x, Fraction):
        return str(x) if x.denominator < 10 ** 6 else f"{float(x):.12g}"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


# 1 ---------------------------------------------------------------------------

def suite_basis_exactness() -> SuiteResult:
    v7 = fundamental_domain(7)
    expected = Box((Arc(Fraction(0), Fraction(1, 8)), Arc(Fraction(0), Fraction(1, 4)), Arc(Fraction(0), Fraction(1, 4))))
    ok7 = v7 == expected
    bad = [m for m in range(61) if fundamental_domain(m).measure() != Fraction(1, 2 ** m)]
    lines = [f"V_7 sides = {[str(a.length) for a in v7.arcs]}", f"levels with |V_m| != 2^-m up to 60: {bad}"]
    return SuiteResult(1, "basis exactness", ok7 and not bad, lines)


# 2 ---------------------------------------------------------------------------

def _tiling_counts(m: int) -> np.ndarray:
    """Coverage counts of the level-m grid by the cells of N_m, from the cells' own arcs."""
    cells = dyadic_cubes(m)
    ell = nonfree_count(m)
    breaks = []
    for i in range(ell):
        pts = set()
        for c in cells:
            for lo, hi in c.arcs()[i].pieces():
                pts.update((lo, hi))
        breaks.append(sorted(pts))
    counts = np.zeros(tuple(len(b) - 1 for b in breaks), dtype=np.int64)
    index = [{x: k for k, x in enumerate(b)} for b in breaks]
    for c in cells:
        sl = []
        for i, arc in enumerate(c.arcs()):
            (lo, hi), = arc.pieces()
            sl.append(slice(index[i][lo], index[i][hi]))
        counts[tuple(sl)] += 1
    return counts


def suite_dyadic_partition(max_level: int = 12, pairwise_level: int = 6) -> SuiteResult:
    lines = []
    ok = True
    for m in range(max_level + 1):
        cells = dyadic_cubes(m)
        total = sum((cube_region(c).measure() for c in cells), Fraction(0))
        counts = _tiling_counts(m) if m else np.ones((), dtype=np.int64)
        tiles = len(cells) == 2 ** m and total == 1 and bool(np.all(counts == 1))
        if m <= pairwise_level:
            regs = [cube_region(c) for c in cells]
            overl = sum(1 for i in range(len(regs)) for k in range(i + 1, len(regs))
                        if region_intersect(regs[i], regs[k]).measure() != 0)
            tiles = tiles and overl == 0
        ok = ok and tiles
        lines.append(f"m={m:2d} cells={len(cells)} total={total} tiles={tiles}")
    return SuiteResult(2, "dyadic partition", ok, lines)


# 3 ---------------------------------------------------------------------------

def random_simple_function(rng: random.Random, max_depth: int = 3, den: int = 8) -> SimpleFunction:
    d = rng.randint(1, max_depth)
    spec = []
    for _ in range(d):
        inner = sorted(rng.sample(range(1, den), rng.randint(0, 3)))
        spec.append(tuple(Fraction(k, den) for k in [0] + inner + [den]))
    shape = tuple(len(b) - 1 for b in spec)
    palette = [Fraction(0), Fraction(1), Fraction(2), Fraction(3), Fraction(1, 2), Fraction(-1)]
    vals = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        vals[idx] = rng.choice(palette)
    return SimpleFunction.from_grid(tuple(spec), vals)


def random_extra_cubes(rng: random.Random, k: int, max_level: int = 9, den: int = 8) -> List[CubeSpec]:
    out = []
    for _ in range(k):
        m = rng.randint(1, max_level)
        t = tuple(Fraction(rng.randrange(den), den) for _ in range(nonfree_count(m)))
        out.append(CubeSpec(m, t))
    return out


class MaximalOracle:
    """Brute force: at a point, the largest average over every dyadic cube of level
    <= max_level containing it (found by `locate`) and every extra cube containing
    it, with averages from region intersections."""

    def __init__(self, f: SimpleFunction, basis: BasisSpec, max_level: int = 12):
        self.f = f.abs()
        self.basis = basis
        self.max_level = max_level
        self._avg: Dict[tuple, Fraction] = {}
        self._extra = [(c, cube_region(c), average(self.f, c)) for c in basis.extra_cubes]

    def _cube_avg(self, c: CubeSpec) -> Fraction:
        key = (c.m, c.translation)
        v = self._avg.get(key)
        if v is None:
            v = average(self.f, c)
            self._avg[key] = v
        return v

    def __call__(self, x: Point) -> Fraction:
        best = Fraction(0)
        if self.basis.include_dyadic:
            for m in range(self.max_level + 1):
                best = max(best, self._cube_avg(locate(x, m)))
        for _, reg, avg in self._extra:
            if reg.contains(x):
                best = max(best, avg)
        return best


def _midpoints(depth: int, den: int):
    axes = [[Fraction(2 * k + 1, 2 * den) for k in range(den)] for _ in range(depth)]
    for idx in np.ndindex(*([den] * depth)):
        yield Point(tuple(axes[i][k] for i, k in enumerate(idx)))


def suite_oracle_equivalence(n: int = 200, seed: int = 3) -> SuiteResult:
    rng = random.Random(seed)
    mismatches = 0
    cells = 0
    for t in range(n):
        f = random_simple_function(rng)
        extra = random_extra_cubes(rng, rng.randint(0, 4))
        basis = BasisSpec(rng.random() < 0.9, tuple(extra))
        mf = maximal_function(f, basis)
        oracle = MaximalOracle(f, basis)
        depth = max([f.depth] + [c.nonfree for c in extra])
        for x in _midpoints(depth, 8):
            cells += 1
            if mf.value_at(x) != oracle(x):
                mismatches += 1
    lines = [f"functions={n} cells compared={cells} mismatches={mismatches}"]
    return SuiteResult(3, "maximal evaluator equals brute-force oracle", mismatches == 0, lines)


# 4 ---------------------------------------------------------------------------

def suite_eps2(n: int = 100, seed: int = 4) -> SuiteResult:
    rng = random.Random(seed)
    qs = [Fraction(1), Fraction(3, 2), Fraction(2)]
    bad = 0
    checked = 0
    validated = 0
    worst = None
    for _ in range(n):
        l = rng.randint(1, 6)
        m = (l - 1) ** 2 + 1 + rng.randint(0, 2 * l)
        ell = nonfree_count(m)
        t = tuple(Fraction(rng.randrange(64), 64) for _ in range(ell))
        Q = CubeSpec(m, t)
        eps = Fraction(rng.randint(1, 8), 16)
        c = make_config_around(Q, eps, l)
        if ell <= 4:
            if not validate_config(c).valid:
                bad += 1
            validated += 1
        for q in qs:
            val = blowup_quotient_closed(c, "chi_Q", q)
            bound = eps2_bound_power(eps, l, q)
            checked += 1
            margin = float(PowerProduct._lift(val) / PowerProduct._lift(bound))
            worst = margin if worst is None else min(worst, margin)
            if not PowerProduct._lift(val) >= PowerProduct._lift(bound):
                bad += 1
    lines = [f"configurations={n} comparisons={checked} validated by region algebra={validated}",
             f"smallest quotient/bound ratio={_fmt(worst)} failures={bad}"]
    return SuiteResult(4, "eps2 lower bound on random configurations", bad == 0, lines)


# 5 ---------------------------------------------------------------------------

def suite_blowup(jmax: int = 64) -> SuiteResult:
    lines = []
    ok = True
    js = range(1, jmax + 1)
    p13 = build_sequence("cor1.3", {}, js)
    fails13 = 0
    for e in p13.entries:
        val = blowup_quotient_closed(e.configuration(), "chi_intersection", 1)
        if not val >= intersection_bound(e.l):
            fails13 += 1
    lines.append(f"cor1.3: chi_intersection quotient >= j/4 for j<={jmax}: failures={fails13}")
    ok = ok and fails13 == 0

    p15 = build_sequence("cor1.5-closed", {"q0": 2}, js)
    q1 = [blowup_quotient_closed(e.configuration(), "chi_Q", 1) for e in p15.entries]
    b1 = [chi_q_bound_power(e.epsilon, e.l, 1) for e in p15.entries]
    above = all(PowerProduct._lift(v) >= PowerProduct._lift(b) for v, b in zip(q1, b1))
    # the q = 1 bound j^2 / (4(j+1)) exceeds (j-1)/4, so it is unbounded in j
    linear = all(PowerProduct._lift(b) >= Fraction(e.j - 1, 4) for b, e in zip(b1, p15.entries))
    increasing = all(q1[i] <= q1[i + 1] for i in range(len(q1) - 1))
    lines.append(f"cor1.5-closed q=1: quotient at j=1,{jmax}: {_fmt(q1[0])}, {_fmt(q1[-1])}; "
                 f">= bound: {above}; bound >= (j-1)/4: {linear}; nondecreasing: {increasing}")
    ok = ok and above and linear and increasing

    q3 = Fraction(3)
    b3 = [PowerProduct._lift(e.epsilon) ** q3 * e.l for e in p15.entries]
    tail_decreasing = all(b3[i] >= b3[i + 1] for i in range(1, len(b3) - 1))
    lines.append(f"cor1.5-closed q=3: per-j lower bound max={_fmt(max(b3))} last={_fmt(b3[-1])} "
                 f"non-increasing for j>=2: {tail_decreasing} (trend only)")
    ok = ok and tail_decreasing

    # closed form == max(1, quotient for the basis {Q, Q^(1..l)}) and <= the full-basis quotient
    cross = []
    checks = [(e, t) for e in p13.entries[:3] for t in ("chi_intersection", "chi_Q")]
    checks += [(e, "chi_Q") for e in p15.entries[:2]]
    for e, testfn in checks:
        c = e.configuration()
        f = test_function(c, testfn)
        own = BasisSpec(False, tuple(list(c.cubes) + [c.around]))
        full = BasisSpec(True, tuple(c.cubes))
        for q in (1, 2):
            closed = blowup_quotient_closed(c, testfn, q)
            restricted = max(Fraction(1), weak_type_quotient_q(f, q, own))
            generic = weak_type_quotient_q(f, q, full)
            good = closed == restricted and closed <= generic
            ok = ok and good
            cross.append(f"{p13.kind if e in p13.entries else p15.kind} j={e.j} {testfn} q={q}: closed={_fmt(closed)} "
                         f"own-basis={_fmt(restricted)} full-basis={_fmt(generic)} consistent={good}")
    lines += cross
    return SuiteResult(5, "unweighted blow-up lower bounds", ok, lines)


# 6 ---------------------------------------------------------------------------

def suite_binomial_core(seed: int = 6) -> SuiteResult:
    grid = [Fraction(0), Fraction(1, 7), Fraction(1, 3), Fraction(1, 2), Fraction(9, 10)]
    feller_bad = 0
    H_bad = 0
    for m in range(1, 41):
        for p in grid:
            a = B.alphas(m, p)
            for k in range(m):
                if B.feller_tail(m, p, k) != a[k + 1]:
                    feller_bad += 1
            if B.H_function(m, p)(1) != m * p:
                H_bad += 1
    rng = random.Random(seed)
    dom_bad = 0
    for _ in range(500):
        m = rng.randint(1, 30)
        x, y = sorted(Fraction(rng.randint(0, 20), 20) for _ in range(2))
        if not B.dominance_check(m, x, y):
            dom_bad += 1
    lines = [f"feller != alpha: {feller_bad}", f"H(1) != mp: {H_bad}", f"dominance failures in 500 triples: {dom_bad}"]
    return SuiteResult(6, "binomial core identities", feller_bad == H_bad == dom_bad == 0, lines)


# 7 ---------------------------------------------------------------------------

def suite_positive_half(fsup_max_m: int = 4096) -> SuiteResult:
    lines = []
    ok = True
    qs = [1.3, B.GOLDEN, 2.0, 3.0]
    worst = 0.0
    for q in qs:
        for k in range(11):
            worst = max(worst, B.fm_identity(2 ** k, q).rel_error)
    lines.append(f"integral identity, m=2^k (k<=10), q in {{1.3, phi, 2, 3}}: max relative error={worst:.3e}")
    ok = ok and worst <= 1e-9

    cheb_bad = 0
    scanned = 0
    for q in (B.GOLDEN, 2.0, 3.0):
        for m in range(B.m0(q, 1.0), 4097):
            scanned += 1
            if not B.chebyshev_sum_bound(m, q, 1.0).ok:
                cheb_bad += 1
    lines.append(f"second-moment sum bound: {scanned} (m, q) pairs, failures={cheb_bad}")
    ok = ok and cheb_bad == 0

    vals = [B.F_sup(m, 2.0, 1.0).value for m in range(1, fsup_max_m + 1)]
    fmax = max(vals)
    dyadic = [vals[2 ** k - 1] for k in range(13) if 2 ** k <= fsup_max_m]
    beyond = [v for k, v in enumerate(dyadic) if 2 ** k >= 64]
    trend = all(beyond[i] >= beyond[i + 1] for i in range(len(beyond) - 1))
    upticks = sum(1 for m in range(65, fsup_max_m + 1) if vals[m - 1] > vals[m - 2])
    lines.append(f"F_sup(m, 2, 1) for m<={fsup_max_m}: max={fmax:.12g} (<= 4: {fmax <= 4})")
    lines.append(f"dyadic trend beyond 64: {[f'{v:.10f}' for v in beyond]} non-increasing={trend}")
    lines.append(f"single-step increases among all m in 65..{fsup_max_m}: {upticks} (informational)")
    ok = ok and fmax <= 4 and trend

    ratios = []
    for k in range(13):
        m = 2 ** k
        if B.moment_route_admissible(m, 1.5, 4):
            ratios.append((m, B.moment_route_bound(m, 1.5, 4)))
    emp = max(r for _, r in ratios)
    finite = all(math.isfinite(r) for _, r in ratios)
    lines.append(f"moment route q=1.5 R=4: admissible m={[m for m, _ in ratios]} empirical C_qR={emp:.12g}")
    ok = ok and finite
    return SuiteResult(7, "positive-half machinery", ok, lines)


# 8 ---------------------------------------------------------------------------

def suite_bounded_overlap(n: int = 100, seed: int = 8, max_overlap: int = 4) -> SuiteResult:
    from .maximal import overlap_function

    rng = random.Random(seed)
    bad = 0
    done = 0
    worst = None
    while done < n:
        f = random_simple_function(rng).abs()
        S = random_extra_cubes(rng, rng.randint(1, 5), max_level=9)
        N = max(overlap_function(S).values())
        if N > max_overlap:
            continue
        done += 1
        m0 = maximal_function(f, BasisSpec(True))
        m1 = maximal_function(f, BasisSpec(True, tuple(S)))
        diff = SimpleFunction.from_grid(*_difference_grid(m1, m0))
        lhs = diff.integral()
        rhs = N * f.integral()
        if lhs > rhs:
            bad += 1
        if rhs:
            r = lhs / rhs
            worst = r if worst is None else max(worst, r)
    lines = [f"cases={n} failures={bad} largest lhs/rhs={_fmt(worst)}"]
    return SuiteResult(8, "bounded-overlap inequality", bad == 0, lines)


def _difference_grid(a: SimpleFunction, b: SimpleFunction):
    from . import grid as G

    spec = G.merge_specs(a.grid_spec(), b.grid_spec())
    _, av = a.to_grid(spec)
    _, bv = b.to_grid(spec)
    return spec, av - bv


# 9 ---------------------------------------------------------------------------

def suite_weighted_blowup(jmax: int = 32) -> SuiteResult:
    lines = []
    ok = True
    js = range(1, jmax + 1)
    flat = WeightFn.flat()
    plan = build_sequence("thm1.6", {"C": 1, "delta": 1}, js)
    rows = weighted_blowup(plan, flat, 1, C=1, delta=1)
    good = all(r.chain_ok and r.bound_ok for r in rows)
    lines.append(f"flat weight C=1 delta=1 N=2: rows={len(rows)} all ok={good} "
                 f"min exit ratio={_fmt(min(r.min_exit_ratio for r in rows))}")
    ok = ok and good
    fam = default_family(8, 16, shift_depth=1)
    for cut in (Fraction(1, 2), Fraction(1, 10)):
        w = tensor_weight([StepFactor.two_valued(cut, 3, 1)])
        fit = comparability_fit(w, fam)
        plan = build_sequence("thm1.6", {"C": fit.C, "delta": fit.delta}, js)
        rows = weighted_blowup(plan, w, 1, fit=fit)
        good = all(r.chain_ok and r.bound_ok for r in rows) and fit.verify()
        nontrivial = sum(1 for r in rows if r.min_chain_ratio != 1)
        lines.append(f"two-valued weight cut={cut}: fitted C={_fmt(fit.C)} delta={fit.delta} N={fit.N}; "
                     f"rows={len(rows)} all ok={good}; rows with a nontrivial chain={nontrivial}")
        ok = ok and good
    return SuiteResult(9, "weighted blow-up chain and bound", ok, lines)


# 10 --------------------------------------------------------------------------

def suite_weight_constants() -> SuiteResult:
    lines = []
    ok = True
    flat = WeightFn.flat(Fraction(5, 2))
    fam = default_family(8, 16, shift_depth=1)
    small = CubeFamily(list(dyadic_family(3)) + list(shifted_level_family(1, 8)))
    vals = {
        "A_2": ap_constant(flat, 2, fam),
        "RH_2": rh_constant(flat, 2, fam),
        "A_1": a1_constant(flat, small),
        "FW": fw_ainfty_estimate(flat, small),
    }
    flat_ok = vals["A_2"] == 1 and vals["RH_2"] == 1.0 and vals["A_1"] == 1 and vals["FW"] == 1
    lines.append("flat weight: " + ", ".join(f"{k}={_fmt(v)}" for k, v in vals.items()))
    ok = ok and flat_ok

    w = tensor_weight([StepFactor.two_valued(Fraction(1, 2), 3, 1)])
    a2 = ap_constant(w, 2, shifted_level_family(1, 8))
    lines.append(f"two-valued weight A_2 estimate on shifted family={_fmt(a2)} (>= 4/3 - 1e-9: {a2 >= Fraction(4, 3) - Fraction(1, 10 ** 9)})")
    ok = ok and a2 >= Fraction(4, 3) - Fraction(1, 10 ** 9)

    stair_lo, _ = staircase(PeriodizedWeight(LineWeight.logcap(), 2), 3)
    tests = {
        "flat": flat,
        "two-valued": w,
        "two-valued 2d": tensor_weight([StepFactor.two_valued(Fraction(1, 2), 3, 1), StepFactor.two_valued(Fraction(1, 4), 2, 1)]),
        "logcap staircase": stair_lo,
    }
    for name, wt in tests.items():
        a1 = a1_constant(wt, small)
        fw = fw_ainfty_estimate(wt, small)
        good = fw <= a1
        ok = ok and good
        lines.append(f"{name}: FW={_fmt(fw)} A_1={_fmt(a1)} FW<=A_1={good}")

    for name, wt in (("flat", flat), ("two-valued", w)):
        rep = sharp_rh_check(wt, dyadic_family(6), r_grid=(Fraction(11, 10), Fraction(3, 2), Fraction(2), Fraction(3)),
                             fw_family=dyadic_family(3))
        lines.append(f"sharp RH {name}: FW={_fmt(rep.ainfty)} r_max={_fmt(rep.r_max)} violations={rep.violations} "
                     f"checked r={[str(r.r) for r in rep.rows if r.constant is not None]}")
        ok = ok and rep.violations == 0 and not rep.range_empty
    return SuiteResult(10, "weight constants", ok, lines)


# 11 --------------------------------------------------------------------------

def suite_periodization() -> SuiteResult:
    lines = []
    ok = True
    const = PeriodizedWeight(LineWeight.constant(), 2)
    worst = Fraction(0)
    tail_ok = True
    for I in default_interval_family():
        res = periodize_integral(const, I)
        gap = abs(3 * I.length - res.value)
        worst = max(worst, gap)
        tail_ok = tail_ok and res.error <= 1e-9 and float(gap) <= res.error
    lines.append(f"constant base: max |3|I| - value|={float(worst):.3e} within certified tail <= 1e-9: {tail_ok}")
    ok = ok and tail_ok

    logcap = LineWeight.logcap()
    closed = []
    for k in range(6):
        expr = line_integral(logcap, -k - 1, k + 1, exact=True)
        closed.append(sp.simplify(expr - (2 * k + 2 + 2 / sp.E)) == 0)
    lines.append(f"logcap w([-k-1, k+1]) = 2k+2+2/e for k<=5: {all(closed)}")
    ok = ok and all(closed)

    pw = PeriodizedWeight(logcap, 2)
    fam = default_interval_family(64)
    alt_gap = 0.0
    for I in fam:
        if I.wraps:
            a = periodize_integral(pw, I)
            b = periodize_integral_alt(pw, I, a.K)
            alt_gap = max(alt_gap, abs(float(a.value) - float(b.value)))
    lines.append(f"wrap-around representatives agree: max gap={alt_gap:.3e}")
    ok = ok and alt_gap <= 1e-9

    for name, base in (("constant", const), ("logcap", pw)):
        a1 = check_perio_a1(base, fam)
        rh = check_perio_rh(base, 2, fam)
        lines.append(f"{name}: A1 violations={a1.violations} RH_2 violations={rh.violations} "
                     f"wrapped intervals={a1.wrapped} of {len(fam)}")
        ok = ok and a1.violations == 0 and rh.violations == 0 and a1.wrapped > 0
    return SuiteResult(11, "periodization", ok, lines)


SUITES: Dict[int, Callable[[], SuiteResult]] = {
    1: suite_basis_exactness,
    2: suite_dyadic_partition,
    3: suite_oracle_equivalence,
    4: suite_eps2,
    5: suite_blowup,
    6: suite_binomial_core,
    7: suite_positive_half,
    8: suite_bounded_overlap,
    9: suite_weighted_blowup,
    10: suite_weight_constants,
    11: suite_periodization,
}


def run_suites(numbers: Optional[Sequence[int]] = None) -> List[SuiteResult]:
    return [SUITES[k]() for k in (numbers or sorted(SUITES))]


def selftest(numbers: Optional[Sequence[int]] = None, first: Optional[List[SuiteResult]] = None) -> SuiteResult:
    """Run the suites twice (or reuse a first run) and compare the rendered output byte for byte."""
    first = first if first is not None else run_suites(numbers)
    a = "\n".join(r.render() for r in first).encode()
    b = "\n".join(r.render() for r in run_suites(numbers)).encode()
    same = a == b
    lines = [f"bytes per run={len(a)} identical={same}"]
    return SuiteResult(12, "determinism", same, lines)
