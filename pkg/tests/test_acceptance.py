"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from toruslab.acceptance import SUITES, SuiteResult, run_suites

BUDGET_S = {1: 1, 2: 30, 3: 300, 4: 60, 5: 120, 6: 60, 7: 600, 8: 300, 9: 120, 10: 300, 11: 120}
RENDERED = {}


def _record(result: SuiteResult, elapsed: float, budget: float):
    within = elapsed < budget
    limit = f"budget {budget:.0f}s" if budget != float("inf") else "no budget"
    line = f"{result.summary()} ({elapsed:.1f}s, {limit}{'' if within else ' EXCEEDED'})"
    print(line)
    print(result.render())
    ACCEPTANCE_LINES.append(line if within else line.replace("[PASS]", "[FAIL]"))
    return within


@pytest.mark.parametrize("number", sorted(SUITES))
def test_criterion(number):
    t = time.perf_counter()
    result = SUITES[number]()
    elapsed = time.perf_counter() - t
    RENDERED[number] = result.render()
    within = _record(result, elapsed, BUDGET_S[number])
    assert result.passed, result.render()
    assert within, f"criterion {number} took {elapsed:.1f}s"


def test_criterion_12_determinism():
    t = time.perf_counter()
    numbers = sorted(SUITES)
    first = {n: RENDERED.get(n) for n in numbers}
    missing = [n for n, text in first.items() if text is None]
    if missing:
        for r in run_suites(missing):
            first[r.number] = r.render()
    second = {r.number: r.render() for r in run_suites(numbers)}
    a = "\n".join(first[n] for n in numbers).encode()
    b = "\n".join(second[n] for n in numbers).encode()
    same = a == b
    result = SuiteResult(12, "determinism", same, [f"bytes per run={len(a)} identical={same}"])
    _record(result, time.perf_counter() - t, float("inf"))
    assert same
