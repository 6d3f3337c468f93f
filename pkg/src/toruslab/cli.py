"""Command line experiment runner: CSV tables plus exact JSON sidecars."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence

from . import binomial as B
from .basis import decompose, fundamental_domain, halved_coordinate, nonfree_count, side_exponents
from .configurations import (
    SequencePlan,
    blowup_quotient_closed,
    build_sequence,
    chi_q_bound_power,
    eps2_bound_power,
    intersection_bound,
)
from .errors import CapExceeded, InfeasibleAnchor, ValidationError
from .exact import PowerProduct, as_fraction, frac_pair
from .maximal import BasisSpec, maximal_function
from .periodize import (
    LineWeight,
    PeriodizedWeight,
    check_perio_a1,
    check_perio_rh,
    default_interval_family,
    periodize_integral,
)
from .simple import SimpleFunction, StepFactor, WeightFn, lq_norm_q, tensor_weight, weak_lq_norm_q
from .weights import (
    CubeFamily,
    a1_constant,
    ap_constant,
    comparability_fit,
    default_family,
    dyadic_family,
    fw_ainfty_estimate,
    rh_constant,
    shifted_level_family,
    weighted_blowup,
)

ESTIMATE = "estimate (lower bound)"


# rendering -------------------------------------------------------------------

def render(x) -> str:
    """Decimal text with 12 significant digits."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        with localcontext() as ctx:
            ctx.prec = 12
            return str(+(Decimal(x.numerator) / Decimal(x.denominator)))
    if isinstance(x, PowerProduct):
        f = x.to_fraction()
        return render(f) if f is not None else f"{float(x):.12g}"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def exact_json(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return frac_pair(x)
    if isinstance(x, PowerProduct):
        return x.to_json()
    if isinstance(x, float):
        return {"float": x}
    return str(x)


class Table:
    def __init__(self, command: str, columns: Sequence[str], seed: int = 0):
        self.command = command
        self.columns = list(columns)
        self.seed = seed
        self.rows: List[list] = []
        self.extra: dict = {}

    def add(self, row: Sequence):
        if len(row) != len(self.columns):
            raise ValueError("row width does not match the header")
        self.rows.append(list(row))

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# toruslab {self.command} seed={self.seed}\n")
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.columns)
        for r in self.rows:
            wr.writerow([render(v) for v in r])
        return buf.getvalue()

    def sidecar(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "columns": self.columns,
            "rows": [[exact_json(v) for v in r] for r in self.rows],
            **self.extra,
        }

    def emit(self, out: Optional[str]):
        text = self.csv_text()
        if out is None:
            sys.stdout.write(text)
            return
        with open(out, "w") as fh:
            fh.write(text)
        with open(out + ".json", "w") as fh:
            json.dump(self.sidecar(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def ordered_map(fn: Callable, items: Iterable) -> list:
    """Map over a worker pool capped by TORUSLAB_THREADS; results keep input order."""
    items = list(items)
    try:
        n = max(1, int(os.environ.get("TORUSLAB_THREADS", "1")))
    except ValueError:
        raise ValidationError("TORUSLAB_THREADS must be a positive integer")
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# argument helpers --------------------------------------------------------------

def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}")


def parse_range(text: str) -> List[int]:
    """'a:b' (inclusive) or a comma list."""
    try:
        if ":" in text:
            a, b = text.split(":", 1)
            return list(range(int(a), int(b) + 1))
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise ValidationError(f"bad integer range {text!r}")


def parse_weight(text: Optional[str]) -> Optional[WeightFn]:
    """A WeightFn JSON file, 'flat', or 'two-valued:cut:inside:outside' in coordinate 1."""
    if text is None:
        return None
    if text == "flat":
        return WeightFn.flat()
    if text.startswith("two-valued"):
        parts = text.split(":")[1:] or ["1/2", "3", "1"]
        if len(parts) != 3:
            raise ValidationError("two-valued weights take cut:inside:outside")
        cut, ins, outs = (as_fraction(Fraction(p)) for p in parts)
        return tensor_weight([StepFactor.two_valued(cut, ins, outs)])
    return WeightFn.from_json(_load_json(text))


def parse_family(text: str) -> CubeFamily:
    """A family JSON file, 'default', 'dyadic:K' or 'shifted:m:den'."""
    if text == "default":
        return default_family()
    if text.startswith("dyadic:"):
        return dyadic_family(int(text.split(":")[1]))
    if text.startswith("shifted:"):
        _, m, den = text.split(":")
        return shifted_level_family(int(m), int(den))
    return CubeFamily.from_json(_load_json(text))


def parse_base(text: str) -> LineWeight:
    if text == "logcap":
        return LineWeight.logcap()
    if text == "constant":
        return LineWeight.constant()
    if text.startswith("power:"):
        return LineWeight.power(Fraction(text.split(":", 1)[1]))
    return LineWeight.from_json(_load_json(text))


# subcommands -----------------------------------------------------------------

def cmd_basis(args) -> int:
    t = Table("basis", ["m", "n", "j", "nonfree", "halved_coordinate", "side_exponents", "cell_measure"], args.seed)
    for m in parse_range(args.levels):
        if m < 0:
            raise ValidationError("sizelevels are nonnegative")
        n, j = decompose(m)
        halved = halved_coordinate(m) if m > 0 else None
        exps = " ".join(str(e) for e in side_exponents(m))
        t.add([m, n, j, nonfree_count(m), halved, exps, fundamental_domain(m).measure()])
    t.emit(args.out)
    return 0


def cmd_eval_maximal(args) -> int:
    f = SimpleFunction.from_json(_load_json(args.function))
    basis = BasisSpec.from_json(_load_json(args.basis)) if args.basis else BasisSpec()
    w = parse_weight(args.weight)
    q = as_fraction(Fraction(args.q))
    if q < 1:
        raise ValidationError("q must be at least 1")
    mf = maximal_function(f, basis)
    symbolic = q.denominator != 1
    strong = lq_norm_q(f, q, w) if not symbolic else _strong_power(f, q, w)
    if strong == 0:
        raise ValidationError("f must not vanish almost everywhere")
    weak = weak_lq_norm_q(mf, q, w, symbolic=symbolic)
    t = Table("eval-maximal", ["q", "weak_power", "strong_power", "quotient_power"], args.seed)
    t.add([q, weak, strong, PowerProduct._lift(weak) / PowerProduct._lift(strong)])
    t.extra["maximal_function"] = mf.to_json()
    if args.mf_out:
        with open(args.mf_out, "w") as fh:
            json.dump(mf.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")
    t.emit(args.out)
    return 0


def _strong_power(f: SimpleFunction, q: Fraction, w):
    from .maximal import _strong_symbolic

    return _strong_symbolic(f, q, w)


TESTFN_FOR_KIND = {"thm1.2": "chi_Q", "cor1.3": "chi_intersection", "cor1.5-closed": "chi_Q", "cor1.5-open": "chi_Q"}


def _blowup_bound(kind: str, testfn: str, eps: Fraction, l: int, q: Fraction):
    if testfn == "chi_intersection":
        if q != 1:
            raise ValidationError("the intersection bound l/4 holds at q = 1")
        return intersection_bound(l)
    if kind == "thm1.2":
        return eps2_bound_power(eps, l, q)
    return chi_q_bound_power(eps, l, q)


def cmd_blowup(args) -> int:
    if args.kind == "thm1.6":
        raise ValidationError("weighted plans run through the weighted-blowup command")
    if args.kind not in TESTFN_FOR_KIND:
        raise ValidationError(f"unknown plan kind {args.kind!r}")
    q = as_fraction(Fraction(args.q))
    if q < 1:
        raise ValidationError("q must be at least 1")
    params = {}
    if args.kind.startswith("cor1.5"):
        if args.q0 is None:
            raise ValidationError(f"{args.kind} plans need --q0")
        params["q0"] = Fraction(args.q0)
    js = list(range(args.jmin, args.jmax + 1))
    plan = build_sequence(args.kind, params, js)
    testfn = args.testfn or TESTFN_FOR_KIND[args.kind]

    def row(e):
        val = blowup_quotient_closed(e.configuration(), testfn, q)
        bound = _blowup_bound(args.kind, testfn, e.epsilon, e.l, q)
        ratio = float(PowerProduct._lift(val) / PowerProduct._lift(bound))
        return [e.j, e.epsilon, e.l, e.sizelevel, val, bound, ratio]

    t = Table("blowup", ["j", "epsilon", "l", "sizelevel", "quotient_power", "bound_power", "ratio"], args.seed)
    for r in ordered_map(row, plan.entries):
        t.add(r)
    t.extra.update({"kind": args.kind, "testfn": testfn, "q": frac_pair(q), "plan": plan.to_json()})
    t.emit(args.out)
    return 0


def cmd_binomial(args) -> int:
    ms = parse_range(args.scan_m)
    if not ms or min(ms) < 1:
        raise ValidationError("the m-scan needs positive integers")
    if args.q <= 1:
        raise ValidationError("q must exceed 1")
    if args.cq <= 0:
        raise ValidationError("C_q must be positive")
    chunks = [ms[i:i + 256] for i in range(0, len(ms), 256)]
    rows = [r for part in ordered_map(lambda c: B.fsup_scan(c, args.q, args.cq), chunks) for r in part]
    t = Table("binomial", ["m", "p", "F_sup", "sum_alpha_power", "cheb_rhs"], args.seed)
    for r in rows:
        t.add([r.m, r.p, r.F_sup, r.sum_alpha_power, r.cheb_rhs])
    t.extra["m0"] = B.m0(args.q, args.cq) if args.q >= B.GOLDEN else None
    t.emit(args.out)
    return 0


def cmd_weights(args) -> int:
    w = parse_weight(args.weight or "flat")
    fam = parse_family(args.family)
    p, r = as_fraction(Fraction(args.p)), as_fraction(Fraction(args.r))
    fit = comparability_fit(w, fam, seed=args.seed)
    t = Table("weights", ["constant", "parameter", "value", "label"], args.seed)
    t.add(["A_p", p, ap_constant(w, p, fam), ESTIMATE])
    t.add(["RH_r", r, rh_constant(w, r, fam), ESTIMATE])
    t.add(["A_1", None, a1_constant(w, fam), ESTIMATE])
    t.add(["FW_A_inf", None, fw_ainfty_estimate(w, fam), ESTIMATE])
    t.add(["fit_C", fit.delta, fit.C, "empirical fit"])
    t.add(["fit_N", fit.delta, fit.N, "empirical fit"])
    t.extra["fit"] = fit.to_json()
    t.emit(args.out)
    return 0


def cmd_weighted_blowup(args) -> int:
    w = parse_weight(args.weight or "flat")
    q = as_fraction(Fraction(args.q))
    if args.plan:
        plan = SequencePlan.from_json(_load_json(args.plan))
    else:
        if args.jmax is None:
            raise ValidationError("give --plan or --jmax")
        params = {"C": Fraction(args.C), "delta": Fraction(args.delta)}
        plan = build_sequence("thm1.6", params, range(1, args.jmax + 1))
    if not plan.entries:
        raise ValidationError("empty plan")
    fit = comparability_fit(w, parse_family(args.family), seed=args.seed) if args.fit else None
    rows = weighted_blowup(plan, w, q, fit=fit)
    cols = ["j", "N", "l", "sizelevel", "min_chain_ratio", "chain_floor", "realized", "bound", "chain_ok", "bound_ok"]
    t = Table("weighted-blowup", cols, args.seed)
    for r in rows:
        t.add([r.j, r.N, r.l, r.sizelevel, r.min_chain_ratio, 1 - r.threshold, r.realized, r.bound, r.chain_ok, r.bound_ok])
    if fit is not None:
        t.extra["fit"] = fit.to_json()
    t.emit(args.out)
    return 0 if all(r.chain_ok and r.bound_ok for r in rows) else 1


def cmd_periodize(args) -> int:
    pw = PeriodizedWeight(parse_base(args.base), Fraction(args.lam), args.K)
    fam = default_interval_family(args.intervals)
    t = Table("periodize", ["start", "length", "wraps", "mass", "tail_error", "K"], args.seed)
    for I, res in zip(fam, ordered_map(lambda I: periodize_integral(pw, I), fam)):
        t.add([I.start, I.length, I.wraps, res.value, res.error, res.K])
    checks = {}
    status = 0
    for item in filter(None, (args.check or "").split(",")):
        if item == "a1":
            rep = check_perio_a1(pw, fam)
        elif item.startswith("rh:"):
            rep = check_perio_rh(pw, Fraction(item[3:]), fam)
        else:
            raise ValidationError(f"unknown check {item!r}; use a1 or rh:<r>")
        checks[item] = {"bound": rep.bound, "violations": rep.violations, "wrapped": rep.wrapped}
        if rep.violations:
            status = 1
        print(f"{item}: bound={render(rep.bound)} violations={rep.violations} wrapped={rep.wrapped}", file=sys.stderr)
    t.extra["checks"] = checks
    t.emit(args.out)
    return status


def cmd_selftest(args) -> int:
    from .acceptance import run_suites, selftest

    numbers = parse_range(args.suites) if args.suites else None
    results = run_suites(numbers)
    for r in results:
        print(r.render())
    det = selftest(numbers, first=results)
    print(det.render())
    return 0 if all(r.passed for r in results) and det.passed else 1


# entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="toruslab", description="Dyadic maximal operators on the infinite torus.")
    ap.add_argument("--seed", type=int, default=0, help="seed for sampled checks and fits (default 0)")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("basis", help="sizelevel table")
    s.add_argument("--levels", default="0:12")
    s.add_argument("--out")
    s.set_defaults(func=cmd_basis)

    s = sub.add_parser("eval-maximal", help="maximal function and weak-type quotient")
    s.add_argument("--function", required=True)
    s.add_argument("--basis")
    s.add_argument("--q", default="1")
    s.add_argument("--weight")
    s.add_argument("--mf-out")
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval_maximal)

    s = sub.add_parser("blowup", help="closed-form blow-up table")
    s.add_argument("--kind", required=True)
    s.add_argument("--q", default="1")
    s.add_argument("--q0")
    s.add_argument("--jmin", type=int, default=1)
    s.add_argument("--jmax", type=int, default=32)
    s.add_argument("--testfn", choices=["chi_Q", "chi_intersection"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_blowup)

    s = sub.add_parser("binomial", help="F_sup scan")
    s.add_argument("--scan-m", default="1:64")
    s.add_argument("--q", type=float, default=2.0)
    s.add_argument("--cq", type=float, default=1.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_binomial)

    s = sub.add_parser("weights", help="weight constant estimates")
    s.add_argument("--weight")
    s.add_argument("--family", default="default")
    s.add_argument("--p", default="2")
    s.add_argument("--r", default="3/2")
    s.add_argument("--out")
    s.set_defaults(func=cmd_weights)

    s = sub.add_parser("weighted-blowup", help="weighted chain and bound table")
    s.add_argument("--plan")
    s.add_argument("--jmax", type=int)
    s.add_argument("--C", default="1")
    s.add_argument("--delta", default="1")
    s.add_argument("--weight")
    s.add_argument("--q", default="1")
    s.add_argument("--fit", action="store_true", help="fit (C, delta) from the weight instead of the plan")
    s.add_argument("--family", default="default")
    s.add_argument("--out")
    s.set_defaults(func=cmd_weighted_blowup)

    s = sub.add_parser("periodize", help="periodized weight masses and checks")
    s.add_argument("--base", default="logcap")
    s.add_argument("--lambda", dest="lam", default="2")
    s.add_argument("--K", type=int, default=32)
    s.add_argument("--intervals", type=int, default=64)
    s.add_argument("--check")
    s.add_argument("--out")
    s.set_defaults(func=cmd_periodize)

    s = sub.add_parser("selftest", help="acceptance suites and determinism")
    s.add_argument("--suites")
    s.set_defaults(func=cmd_selftest)
    return ap


def cap_hint(exc: CapExceeded) -> str:
    if isinstance(exc, InfeasibleAnchor):
        return "lower --jmax or the number of cubes per configuration"
    return "the closed forms behind `toruslab blowup` need no refinement grid"


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"error: cap exceeded: {exc} ({cap_hint(exc)})", file=sys.stderr)
        return 3
    except (ValidationError, ValueError, ZeroDivisionError) as exc:
        print(f"error: precondition violated: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
