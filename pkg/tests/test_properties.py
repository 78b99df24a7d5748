"""Implication groups of the spectrum on random pairs."""
from hypothesis import given, settings
from hypothesis import strategies as st

from npequiv.spectrum import IMPLICATIONS, SpectrumOptions, random_pair, run_spectrum

# The one bridge with a known counterexample; it is pinned in test_sim.
KNOWN_BROKEN = {("ps-dis", "ptr-dis")}


def group(prefixes):
    rels = set()
    for imp in IMPLICATIONS:
        if (imp.premise, imp.conclusion) in KNOWN_BROKEN:
            continue
        if any(imp.premise.startswith(p) for p in prefixes) or any(imp.conclusion.startswith(p) for p in prefixes):
            rels |= {imp.premise, imp.conclusion}
    return tuple(sorted(rels))


GROUPS = {
    "traces": group(("ptr", "pctr")),
    "failures": group(("pf", "pftr")),
    "readiness": group(("pr", "prtr")),
    "simulations": group(("ps", "pcs", "pfs", "prs")),
    "bisimulations": group(("pb",)),
}


def broken(seed, relations):
    m = random_pair(seed, 5)
    report = run_spectrum(m, "s0", "s1", SpectrumOptions(testing=False, strict=False, only=relations))
    assert not report.errors or all(e.startswith("unsupported") for e in report.errors.values())
    return [(i.premise, i.conclusion) for i, _, _ in report.broken
            if (i.premise, i.conclusion) not in KNOWN_BROKEN]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(sorted(GROUPS)))
def test_implications_hold_on_random_pairs(seed, name):
    assert broken(seed, GROUPS[name]) == []


def test_groups_cover_every_implication():
    covered = {r for rels in GROUPS.values() for r in rels}
    for imp in IMPLICATIONS:
        if (imp.premise, imp.conclusion) not in KNOWN_BROKEN:
            assert imp.premise in covered and imp.conclusion in covered
