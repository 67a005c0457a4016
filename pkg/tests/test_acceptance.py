"""Acceptance run: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (the summary lines are
printed at the end of the module) or directly with
``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import properties  # noqa: E402
from sidforge.atm import check_derivation, check_pseudo_derivation, enumerate_pseudo_derivations, pseudo_to_derivation, violations  # noqa: E402
from sidforge.fixtures import (  # noqa: E402
    BROKEN_VIOLATIONS,
    accepting_derivation,
    accepting_pseudo_derivation,
    broken_pseudo_derivation,
    example_machine,
    hand_built_encoding,
    rejecting_machine,
)
from sidforge.harness import (  # noqa: E402
    CounterModel,
    HoldsWithinBound,
    check_encoding,
    compiled_entailment,
    decode_structure,
    encode_pseudo_derivation,
    h2_isomorphic,
    iter_lhs_models,
    same_tree,
)
from sidforge.pce import check_connected, check_progressing, established_syntactic  # noqa: E402
from sidforge.reduction import ReductionParams, compile, surface_rules  # noqa: E402
from sidforge.shorthands import expand_binary_vars, expand_choices, expand_disequality, expand_tuples  # noqa: E402
from sidforge.syntax import parse_rules  # noqa: E402
from sidforge.unfolding import Models, models_sid  # noqa: E402


class Timer:
    def __init__(self, limit: float):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


# ---------------------------------------------------------------------------
# criteria; each returns a short detail string or raises AssertionError


def criterion_1():
    with Timer(1.0):
        rs = parse_rules("p(x) <= x -> (@,@,@,@)")
        ordered = expand_choices(expand_tuples(rs))
        naive = expand_choices(rs, naive=True)
    assert len(ordered) == 8, len(ordered)
    assert len(naive) == 16, len(naive)
    return "tuples then choices: 8 rules; choices first: 16 rules"


def criterion_2():
    checked = 0
    with Timer(1.0):
        for n in (1, 2, 3, 4):
            p = ReductionParams(example_machine(), n)
            for r in expand_disequality(surface_rules(p)):
                i = len(r.binary_vars)
                added = len(expand_binary_vars([r], p.env)) - 1
                assert added == 2 * i, (str(r), added)
                checked += i > 0
    assert checked > 0
    return f"{checked} rules with binary existentials, each adds exactly 2*i rules"


def criterion_3():
    m = example_machine()
    with Timer(1.0):
        assert check_derivation(m, accepting_derivation())
        assert check_pseudo_derivation(m, accepting_pseudo_derivation(), 1)
        t = broken_pseudo_derivation()
        assert check_pseudo_derivation(m, t, 1)
        assert pseudo_to_derivation(m, t) is None
        found = tuple((v.kind, v.at) for v in violations(m, t, 1))
    assert found == BROKEN_VIOLATIONS, found
    return "accepting tree valid; broken tree pseudo-only with violations " + ", ".join(
        f"{k}@{list(at)}" for k, at in found
    )


def criterion_4():
    with Timer(5.0):
        c = compile(ReductionParams(example_machine(), 1))
        prog, _ = check_progressing(c.sid)
        conn, _ = check_connected(c.sid)
        est, diags = established_syntactic(c.sid)
    assert prog and conn and est, diags[:3]
    return f"{len(c.sid.rules)} core rules: progressing, connected, established"


def criterion_5():
    m = example_machine()
    p = ReductionParams(m, 1)
    n = 0
    with Timer(120.0):
        c = compile(p)
        for t in enumerate_pseudo_derivations(m, 1, 9):
            st, _w = encode_pseudo_derivation(t, p, c)
            back = decode_structure(st, p, compiled=c)
            assert same_tree(back, t), t
            assert check_encoding(st, t, p, c), t
            n += 1
    assert n == 585, n
    return f"{n} pseudo-derivations with at most 9 nodes round-trip"


def criterion_6():
    m = example_machine()
    p = ReductionParams(m, 1)
    n = bad = 0
    with Timer(300.0):
        c = compile(p)
        for t in enumerate_pseudo_derivations(m, 1, 7):
            st, _w = encode_pseudo_derivation(t, p, c)
            in_c = models_sid(st, c.sid, c.rhs) is Models.TRUE
            broken = bool(violations(m, t, 1))
            assert in_c == broken, t
            n += 1
            bad += broken
    assert n == 73
    return f"{n} pseudo-derivations with at most 7 nodes; {bad} violating, all and only those satisfy c_M"


def criterion_7():
    # (i) the accepting machine: a counter-model whose tree part matches the hand-built encoding
    p = ReductionParams(example_machine(), 1)
    with Timer(300.0):
        c = compile(p)
        v = compiled_entailment(c, 12)
    assert isinstance(v, CounterModel), v
    assert h2_isomorphic(v.structure, hand_built_encoding(), p, c), "counter-model differs from the hand-built encoding"
    # (ii) the rejecting machine: no counter-model, and every model's tree breaks condition I
    q = ReductionParams(rejecting_machine(), 1)
    with Timer(300.0):
        d = compile(q)
        w = compiled_entailment(d, 12)
        assert isinstance(w, HoldsWithinBound), w
        kinds = []
        for _u, st in iter_lhs_models(d.sid, d.lhs, 12, d.weight):
            t = decode_structure(st, q, compiled=d)
            kinds.append(sorted({x.kind for x in violations(q.machine, t, 1)}))
    missing_I = [k for k in kinds if "I" not in k]
    assert not missing_I, (
        f"(i) holds; (ii) HoldsWithinBound over {len(kinds)} models, but {len(missing_I)} decode "
        f"without a condition-I violation (kinds {missing_I})"
    )
    return f"(i) CounterModel isomorphic on the tree part; (ii) HoldsWithinBound, {len(kinds)} models all break I"


def criterion_8():
    m = example_machine()
    with Timer(30.0):
        counts = [len(compile(ReductionParams(m, n)).sid.rules) for n in (1, 2, 3, 4)]
    # exact least-squares line through (n, count)
    xs = [Fraction(n) for n in (1, 2, 3, 4)]
    ys = [Fraction(k) for k in counts]
    mx, my = sum(xs) / 4, sum(ys) / 4
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
    residual = sum((y - (my + slope * (x - mx))) ** 2 for x, y in zip(xs, ys))
    assert residual == 0, f"core-rule counts {counts} are not affine in N (squared residual {residual})"
    return f"core-rule counts {counts} fit an affine function exactly"


def criterion_9():
    before = sum(properties.COUNTS.values())
    with Timer(300.0):
        for name, run in properties.RUNNERS.items():
            run(2600)
    total = sum(properties.COUNTS.values()) - before
    assert total >= 10_000, total
    return f"{total} randomized cases, 0 failures"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]
TITLES = {
    1: "choice expansion counts",
    2: "binary-variable elimination adds 2*i rules",
    3: "derivation and pseudo-derivation checks",
    4: "compiled system is progressing, connected, established",
    5: "encode/decode round trip",
    6: "c_M membership iff violations",
    7: "entailment verdicts for both machines",
    8: "core-rule count affine in N",
    9: "randomized property suites",
}


# ---------------------------------------------------------------------------
# pytest wiring: every criterion is a test, and the summary is printed once

RESULTS: dict[int, tuple[bool, str]] = {}


def _evaluate(k: int) -> tuple[bool, str]:
    try:
        return True, CRITERIA[k - 1]()
    except AssertionError as e:
        return False, str(e) or "assertion failed"


def _line(k: int) -> str:
    ok, detail = RESULTS[k]
    return f"[{'PASS' if ok else 'FAIL'}] criterion {k} ({TITLES[k]}): {detail}"


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    lines = [_line(k) for k in sorted(RESULTS)]
    if reporter is not None:
        reporter.write_line("")
        for line in lines:
            reporter.write_line(line)
    else:
        print("\n".join(lines))


@pytest.mark.parametrize("k", range(1, 10))
def test_criterion(k):
    RESULTS[k] = _evaluate(k)
    print(_line(k))
    ok, detail = RESULTS[k]
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k in range(1, 10):
        RESULTS[k] = _evaluate(k)
        print(_line(k), flush=True)
        failed += not RESULTS[k][0]
    sys.exit(1 if failed else 0)
