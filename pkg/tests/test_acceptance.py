"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines go straight to the terminal) or as a script:
``python3 tests/test_acceptance.py``.
"""
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from npequiv import check, enumerate_resolutions, event_prob, extremal, load  # noqa: E402
from npequiv.events import FAMILIES, CompletedTrace, ReadyPair, Trace  # noqa: E402
from npequiv.sim import check_bisimulation, largest_simulation  # noqa: E402
from npequiv.spectrum import CORPUS_DIR, fuzz, random_pair, run_corpus  # noqa: E402
from npequiv.testing import check_pte_search  # noqa: E402
from npequiv.trace_equiv import check_supinf  # noqa: E402

F = Fraction


def report(number, title, problems):
    line = f"{'PASS' if not problems else 'FAIL'} criterion {number}: {title}"
    if problems:
        line += " | " + "; ".join(problems[:5])
        if len(problems) > 5:
            line += f"; ... {len(problems) - 5} more"
    report.sink(line)
    assert not problems, line


report.sink = print


@pytest.fixture(autouse=True)
def _lines_to_terminal(capsys):
    def sink(line):
        with capsys.disabled():
            print("\n" + line)

    report.sink = sink
    yield
    report.sink = print


def model(slug):
    return load(CORPUS_DIR / f"{slug}.nplts")


def expect_max(m, query, want1, want2):
    got = (extremal(m, "s1", query).high, extremal(m, "s2", query).high)
    return [] if got == (want1, want2) else [f"max {query}: got {got[0]} vs {got[1]}"]


def expect(m, equal, distinct):
    problems = []
    for rid in equal:
        if not check(rid, m, "s1", "s2").equivalent:
            problems.append(f"{rid} should be equal")
    for rid in distinct:
        if check(rid, m, "s1", "s2").equivalent:
            problems.append(f"{rid} should be distinct")
    return problems


def test_criterion_1_extremal_traces_under_bisimilarity():
    m = model("pb_pbsupinf_vs_others")
    problems = expect_max(m, Trace(("a", "b", "c")), F(17, 25), F(61, 100))
    problems += expect(m, equal=["pb", "pb-supinf"],
                       distinct=["ptr-supinf", "pctr-supinf", "ptr", "ptr-dis", "pctr", "pctr-dis"])
    report(1, "trace a b c max 17/25 vs 61/100; trace relations distinct; pb, pb-supinf equal", problems)


def test_criterion_2_extremal_completed_traces_versus_testing():
    m = model("pfsupinf_vs_ptesupinf")
    problems = expect_max(m, CompletedTrace(("a", "b")), F(6, 25), F(21, 100))
    problems += expect(m, equal=[], distinct=["pctr-supinf"])
    v = check_pte_search("supinf", m, "s1", "s2", depth=3, branch=3)
    if not v.equivalent:
        problems.append(f"search found a test: {v.witness.description}")
    report(2, "ctrace a b max 6/25 vs 21/100; pctr-supinf distinct; no test at depth 3, branch 3", problems)


def test_criterion_3_ready_traces_identify_what_extremal_traces_separate():
    m = model("pctrdis_vs_prtr")
    problems = expect_max(m, Trace(("a", "b")), F(1), F(1, 2))
    problems += expect(m, equal=["prtr", "pr"], distinct=["ptr-supinf"])
    report(3, "trace a b max 1 vs 1/2; ptr-supinf distinct; prtr, pr equal", problems)


def test_criterion_4_ready_pairs_versus_ready_traces():
    m = model("pr_vs_prtr")
    problems = expect_max(m, ReadyPair(("a", "b", "f"), frozenset()), F(1), F(1, 2))
    problems += expect(m, equal=["prtr"], distinct=["pr-supinf"])
    report(4, "ready pair (a b f, {}) max 1 vs 1/2; pr-supinf distinct; prtr equal", problems)


def test_criterion_5_corpus_regression():
    rows = run_corpus()
    problems = [f"{r.entry} {r.relation}: expected {r.expected}, got {r.got}" for r in rows if not r.ok]
    report(5, f"corpus regression, {len(rows) - len(problems)}/{len(rows)} expectations", problems)


def test_criterion_6_no_implication_violations_on_random_models():
    found = fuzz(range(500), 6)
    problems = [f"seed {c.seed}: {c.label()}" for c in found]
    report(6, "500 random acyclic pairs, zero implication violations", problems)


def test_criterion_7_agreement_with_brute_force():
    problems = []
    for seed in range(100):
        m = random_pair(seed, 5)
        for family in FAMILIES:
            got = check_supinf(family, m, "s0", "s1").equivalent
            want, _ = oracles.supinf_verdict(m, "s0", "s1", family)
            if got != want:
                problems.append(f"seed {seed} {family}-supinf: {got} vs oracle {want}")
        if check_bisimulation("supinf", m, "s0", "s1").equivalent != oracles.bisimilar(m, "s0", "s1", "supinf"):
            problems.append(f"seed {seed} pb-supinf")
        for family in ("ps", "pcs", "pfs", "prs"):
            got = largest_simulation(m, family, "sup", ["s0", "s1"])
            if got != oracles.largest_simulation(m, ["s0", "s1"], family, "sup"):
                problems.append(f"seed {seed} {family}-sup")
        queries = oracles.sample_queries(m)
        for s in ("s0", "s1"):
            for r in enumerate_resolutions(m, s, "all"):
                listed = oracles.resolution_computations(r)
                for q in queries:
                    want = sum((p for tr, sts, p in listed
                                if oracles.compatible(q, tr, tuple(oracles.enabled(m, x) for x in sts),
                                                      m.alphabet)), Fraction(0))
                    if event_prob(r, m, q).value != want:
                        problems.append(f"seed {seed} {s} {q}")
    report(7, "supinf verdicts and event probabilities match brute force on 100 random models", problems)


def test_criterion_8_exact_arithmetic():
    import ast

    from test_exactness import SOURCES, float_sites

    problems = [f"{p.name}:{line} {what}" for p in SOURCES for line, what in float_sites(ast.parse(p.read_text()))]
    for slug in ("pb_pbsupinf_vs_others", "pfsupinf_vs_ptesupinf", "pr_vs_prtr"):
        m = model(slug)
        for family in FAMILIES:
            v = check_supinf(family, m, "s1", "s2")
            if v.witness and any(isinstance(x, float) for pair in v.witness.values for x in pair):
                problems.append(f"{slug} {family}: float in witness")
    report(8, "no floating-point values in verdict paths", problems)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
