from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npequiv import Distribution, ValidationError, build, disjoint_union, validate
from npequiv.model import (
    DistributionSum,
    DuplicateId,
    EmptySupport,
    UnknownState,
    export_dot,
    to_rational,
)
from npequiv.spectrum import random_model


def raw(states, transitions, designated=()):
    return {"name": "m", "states": states, "transitions": transitions, "designated": list(designated)}


def test_single_state_is_valid():
    m = validate(raw(["s"], []))
    assert m.states == ("s",)
    assert m.init("s") == frozenset()
    assert m.is_terminal("s")


def test_two_level_model_with_half_splits_is_valid():
    m = build("two_level", {
        "s1": [("a", {"t1": "0.5", "t2": "0.5"}), ("a", {"t3": "0.5", "t4": "0.5"})],
        "t1": [("b1", {"u": 1})], "t2": [("b2", {"u": 1})],
        "t3": [("b3", {"u": 1})], "t4": [("b4", {"u": 1})],
        "u": [],
    })
    assert len(m.outgoing("s1")) == 2
    assert m.alphabet == {"a", "b1", "b2", "b3", "b4"}


def test_short_distribution_is_rejected():
    with pytest.raises(ValidationError) as err:
        validate(raw(["s", "t"], [("s", "a", {"t": Fraction(9, 10)})]))
    assert [type(i) for i in err.value.issues] == [DistributionSum]


def test_every_issue_is_reported_at_once():
    with pytest.raises(ValidationError) as err:
        validate(raw(["s", "s", "t"], [("s", "a", {"t": Fraction(1, 2)}), ("s", "b", {"ghost": 1}),
                                        ("t", "c", {})]))
    kinds = {type(i) for i in err.value.issues}
    assert {DuplicateId, DistributionSum, UnknownState, EmptySupport} <= kinds


def test_floats_are_refused():
    with pytest.raises(TypeError):
        to_rational(0.5)
    assert to_rational("0.68") == Fraction(17, 25)
    assert to_rational("2/5") == Fraction(2, 5)


def test_distribution_access():
    d = Distribution.of({"x": "1/3", "y": "2/3"})
    assert d["x"] == Fraction(1, 3)
    assert d["zz"] == 0
    assert d.mass({"x", "y"}) == 1
    assert d.support == ("x", "y")


def test_union_with_isolated_state():
    m = build("m", {"s": [("a", {"t": 1})], "t": []}, designated=["s"])
    lone = validate(raw(["z"], []))
    u, left, right = disjoint_union(m, lone)
    assert len(u.states) == 3
    assert u.is_terminal(right["z"])
    assert u.alphabet == m.alphabet
    assert u.outgoing(left["s"])[0].target[left["t"]] == 1


def test_union_of_model_with_itself_has_isomorphic_halves(corpus):
    m = corpus("pf_vs_ptr")
    u, left, right = disjoint_union(m, m)
    assert len(u.states) == 2 * len(m.states)
    for s in m.states:
        lo = sorted((t.label, tuple(sorted((k[2:], v) for k, v in t.target.items))) for t in u.outgoing(left[s]))
        ro = sorted((t.label, tuple(sorted((k[2:], v) for k, v in t.target.items))) for t in u.outgoing(right[s]))
        assert lo == ro


def restrict(model, root):
    keep = model.reachable([root])
    return build(root, {s: [(t.label, t.target.as_dict()) for t in model.outgoing(s)] for s in keep},
                 designated=[root])


def test_union_of_the_two_offer_sides(corpus):
    m = corpus("dis_vs_by")
    left, right = restrict(m, "s1"), restrict(m, "s2")
    u, inj1, inj2 = disjoint_union(left, right)
    assert len(u.states) == len(left.states) + len(right.states) == 26
    assert set(u.designated) == {inj1["s1"], inj2["s2"]}


def test_dot_export_is_deterministic(corpus):
    m = corpus("by_vs_supinf")
    assert export_dot(m) == export_dot(corpus("by_vs_supinf"))
    one = export_dot(validate(raw(["s"], [])))
    assert one.count("xlabel=") == 1 and "->" not in one


def test_dot_links_siblings_of_a_split():
    m = build("m", {"s": [("a", {"t": "1/2", "u": "1/2"})], "t": [], "u": []})
    dot = export_dot(m)
    assert 'label="a"' in dot
    assert dot.count('label="1/2"') == 2
    assert "style=dashed" in dot


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_init_is_the_label_set(seed):
    m = random_model(seed, 6)
    for s in m.states:
        assert m.init(s) == {t.label for t in m.transitions if t.source == s}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["a", "b", "c", "d"]))
def test_init_grows_when_transitions_are_added(seed, label):
    m = random_model(seed, 6)
    s = m.states[0]
    spec = {x: [(t.label, t.target.as_dict()) for t in m.outgoing(x)] for x in m.states}
    spec[s] = spec[s] + [(label, {s: 1})]
    bigger = build("bigger", spec)
    assert m.init(s) <= bigger.init(s)
    assert label in bigger.init(s)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_every_distribution_sums_to_exactly_one(seed):
    m = random_model(seed, 6, max_branch=3)
    for t in m.transitions:
        assert sum(p for _, p in t.target.items) == 1
        assert all(type(p) is Fraction for _, p in t.target.items)
