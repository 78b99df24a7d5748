from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from npequiv import build, enumerate_resolutions
from npequiv.resolutions import (
    BoundTooSmall,
    CombinedTransition,
    CyclicNeedsBound,
    NotPrefixFree,
    alpha_restrict,
    combine,
    combined_transitions_basis,
    count_resolutions,
    prob_of,
)
from npequiv.spectrum import random_model


def canonical(tree):
    state, label, kids = tree
    return (state, label, tuple(sorted((x, p, canonical(c)) for x, p, c in kids)))


def test_lone_state_has_only_the_empty_resolution():
    m = build("m", {"s": []})
    rs = enumerate_resolutions(m, "s", "all")
    assert len(rs) == 1
    assert rs[0].tree.states == ("z0",) and not rs[0].tree.transitions


@pytest.mark.parametrize("slug", ["pf_vs_ptr", "by_vs_supinf"])
def test_maximal_resolution_count_matches_scheduler_choices(corpus, slug):
    m = corpus(slug)
    rs = enumerate_resolutions(m, "s1", "max")
    brute = {canonical(t) for t in oracles.maximal_resolutions(m, "s1")}
    assert len(rs) == len(brute) == 3
    assert all(r.is_maximal(m) for r in rs)


def test_cycles_need_a_bound():
    m = build("loop", {"s": [("a", {"s": 1})]})
    with pytest.raises(CyclicNeedsBound):
        enumerate_resolutions(m, "s", "all")
    rs = enumerate_resolutions(m, "s", "all", depth_bound=3)
    assert rs.bounded and len(rs) == 4
    with pytest.raises(BoundTooSmall):
        enumerate_resolutions(m, "s", "alpha", depth_bound=2, alpha=("a", "a", "a"))


def test_empty_trace_restriction_keeps_everything(corpus):
    m = corpus("ptrsupinf_anomaly_maxres")
    rs = enumerate_resolutions(m, "s1", "max")
    assert alpha_restrict(rs, m, ()).items == rs.items


def test_restriction_drops_the_branch_that_cannot_continue(corpus):
    m = corpus("ptrsupinf_anomaly_maxres")
    rs = enumerate_resolutions(m, "s1", "max")
    assert len(rs) == 2
    kept = alpha_restrict(rs, m, ("a", "b"))
    assert [r.root_node.branches[0][0] for r in kept] == ["t1"]
    assert len(alpha_restrict(rs, m, ("a",))) == 2


def test_probability_of_a_computation_set(corpus):
    m = corpus("dis_vs_by")
    rs = enumerate_resolutions(m, "s1", "max")
    left = next(r for r in rs if r.root_node.branches[0][0] == "l1")
    hits = [c for c in left.computations() if c.trace == ("offer", "draw")]
    assert prob_of(hits) == Fraction(2, 5)
    empty = [c for c in left.computations() if not c.steps]
    assert prob_of(empty) == 1
    step = next(c for c in left.computations() if len(c.steps) == 1)
    longer = next(c for c in left.computations() if len(c.steps) == 2 and c.steps[0] == step.steps[0])
    with pytest.raises(NotPrefixFree):
        prob_of([step, longer])


def test_basis_and_combinations(corpus):
    m = corpus("by_vs_supinf")
    basis = combined_transitions_basis(m, "s2", "offer")
    assert len(basis) == 2
    mix = combine(m, "s2", "offer", [Fraction(1, 2), Fraction(1, 2)]).distribution
    win1 = mix.mass({s for s in m.states if "win1" in m.init(s)})
    win2 = mix.mass({s for s in m.states if "win2" in m.init(s)})
    assert (win1, win2) == (Fraction(1, 2), Fraction(1, 2))
    assert combined_transitions_basis(m, "r1x", "offer") == []
    single = combined_transitions_basis(m, "r1", "win1")
    assert len(single) == 1
    assert combine(m, "r1", "win1", [1]).distribution == single[0].target


def test_combined_transition_rejects_bad_coefficients(corpus):
    m = corpus("by_vs_supinf")
    a, b = combined_transitions_basis(m, "s2", "offer")
    with pytest.raises(ValueError):
        CombinedTransition("s2", "offer", ((a, Fraction(1, 2)), (b, Fraction(1, 3))))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_enumeration_matches_naive_scheduler_choices(seed):
    m = random_model(seed, 5)
    s = m.states[0]
    for kind, naive in (("all", oracles.resolutions), ("max", oracles.maximal_resolutions)):
        rs = enumerate_resolutions(m, s, kind)
        assert len(rs) == len({canonical(t) for t in naive(m, s)})
        assert len(rs) == count_resolutions(m, s, maximal=kind == "max")
        assert len(set(rs)) == len(rs)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_resolution_steps_project_onto_model_transitions(seed):
    m = random_model(seed, 5)
    for r in enumerate_resolutions(m, m.states[0], "all"):
        corr = r.corr
        for t in r.tree.transitions:
            projected = {corr[z]: p for z, p in t.target.items}
            assert any(u.label == t.label and u.target.as_dict() == projected for u in m.outgoing(corr[t.source]))
        assert len({t.source for t in r.tree.transitions}) == len(r.tree.transitions)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_maximal_resolutions_conserve_probability(seed):
    m = random_model(seed, 6)
    for r in enumerate_resolutions(m, m.states[0], "max"):
        assert prob_of(r.computations(maximal_only=True)) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_fully_probabilistic_models_have_one_maximal_resolution(seed):
    m = random_model(seed, 6)
    spec = {s: [(t.label, t.target.as_dict()) for t in m.outgoing(s)[:1]] for s in m.states}
    det = build("det", spec)
    assert len(enumerate_resolutions(det, det.states[0], "max")) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.sampled_from("abc"), max_size=3))
def test_restriction_is_a_filter(seed, alpha):
    m = random_model(seed, 5)
    rs = enumerate_resolutions(m, m.states[0], "all")
    kept = alpha_restrict(rs, m, alpha)
    assert set(kept) <= set(rs)
