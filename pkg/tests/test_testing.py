from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npequiv import build
from npequiv.spectrum import load_corpus, random_pair
from npequiv.testing import (
    InvalidTest,
    check_pte,
    check_pte_search,
    check_test_model,
    interact,
    search_distinguishing_test,
    success_envelope,
)

ENTRIES = {e.id: e for e in load_corpus()}


def observer(name, *labels):
    """A linear test: perform ``labels`` in order, then succeed."""
    spec, cur = {}, "o0"
    for i, a in enumerate(labels):
        spec[cur] = [(a, {f"o{i + 1}": 1})]
        cur = f"o{i + 1}"
    spec[cur] = []
    return build(name, spec, designated=["o0"], success=[cur])


def test_success_at_once_is_one_configuration(corpus):
    m = corpus("pf_vs_ptr")
    sys = interact(m, "s1", observer("now"), "o0")
    assert len(sys.configuration) == 1
    assert sys.success == {sys.root}
    assert success_envelope(sys) == (1, 1)


def test_unreachable_success_scores_zero(corpus):
    m = corpus("pf_vs_ptr")
    sys = interact(m, "s1", observer("never", "zzz"), "o0")
    assert success_envelope(sys) == (0, 0)


def test_bundled_test_interaction(corpus):
    e = ENTRIES["ptesupinf_anomaly"]
    test = e.suite()[0]
    o = check_test_model(test)
    for s in (e.s1, e.s2):
        sys = interact(e.model(), s, test, o)
        assert all(pair[1] in test.states for pair in sys.configuration.values())
        sup, inf = success_envelope(sys)
        assert 0 <= inf <= sup <= 1


def test_test_validation():
    with pytest.raises(InvalidTest):
        check_test_model(build("t", {"o": []}))
    with pytest.raises(InvalidTest):
        check_test_model(build("t", {"o": [("a", {"w": 1})], "w": [("b", {"w": 1})]},
                               designated=["o"], success=["w"]))


@pytest.mark.parametrize("variant", ["supinf", "fe", "tbt-dis", "tbt", "tbt-supinf"])
def test_trivial_suite_never_separates(corpus, variant):
    m = corpus("ptesupinf_anomaly")
    assert check_pte(variant, m, "s1", "s2", [observer("now")]).equivalent


def test_empty_suite_is_rejected(corpus):
    with pytest.raises(ValueError):
        check_pte("supinf", corpus("ptesupinf_anomaly"), "s1", "s2", [])


@pytest.mark.parametrize("slug, variant", [
    ("ptesupinf_anomaly", "supinf"),
    ("ptetbtsupinf_vs_ptrsupinf", "tbt"),
    ("ptetbtsupinf_vs_ptrsupinf", "tbt-supinf"),
])
def test_bundled_tests_separate(slug, variant):
    e = ENTRIES[slug]
    v = check_pte(variant, e.model(), e.s1, e.s2, e.suite())
    assert not v.equivalent and v.witness.test is not None


def test_search_finds_nothing_between_a_state_and_itself(corpus):
    assert search_distinguishing_test(corpus("dis_vs_by"), "s1", "s1", "supinf", 2, 2) is None


def test_search_rediscovers_a_separating_test(corpus):
    m = corpus("ptesupinf_anomaly")
    test = search_distinguishing_test(m, "s1", "s2", "supinf", 3, 2)
    assert test is not None
    assert not check_pte("supinf", m, "s1", "s2", [test]).equivalent


def test_bounded_search_on_extremal_failures(corpus):
    v = check_pte_search("supinf", corpus("pfsupinf_vs_ptesupinf"), "s1", "s2", 3, 3)
    assert v.equivalent and v.bounded


def test_search_bounds_are_validated(corpus):
    with pytest.raises(ValueError):
        search_distinguishing_test(corpus("dis_vs_by"), "s1", "s2", "supinf", 0, 2)
    with pytest.raises(ValueError):
        search_distinguishing_test(corpus("dis_vs_by"), "s1", "s2", "nope", 1, 1)


def test_distribution_sensitive_test_on_offers():
    e = ENTRIES["dis_vs_by"]
    m = e.model()
    assert not check_pte_search("tbt-dis", m, e.s1, e.s2, *e.test_bounds).equivalent
    assert check_pte_search("tbt", m, e.s1, e.s2, *e.test_bounds).equivalent


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_extremal_separation_implies_forall_exists_separation(seed):
    m = random_pair(seed, 4)
    found = check_pte_search("supinf", m, "s0", "s1", 2, 2)
    if found.equivalent:
        return
    assert not check_pte("fe", m, "s0", "s1", [found.witness.test]).equivalent


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_envelope_is_ordered(seed):
    m = random_pair(seed, 4)
    test = observer("ab", "a", "b")
    for s in ("s0", "s1"):
        sup, inf = success_envelope(interact(m, s, test, "o0"))
        assert Fraction(0) <= inf <= sup <= 1
