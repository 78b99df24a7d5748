import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from npequiv import EquivalenceChecker, SpectrumTransformer
from npequiv.spectrum import CORPUS_DIR, load_corpus


def test_checker_predicts_booleans(corpus):
    checker = EquivalenceChecker(relation="pb").fit(corpus("pb_pbsupinf_vs_others"))
    got = checker.predict([("s1", "s2"), ("s1", "s1")])
    assert got.dtype == bool and got.tolist() == [True, True]
    assert checker.n_states_ == len(checker.states_)


def test_checker_decide_keeps_witnesses(corpus):
    checker = EquivalenceChecker(relation="ptr-supinf").fit(corpus("pb_pbsupinf_vs_others"))
    (v,) = checker.decide(("s1", "s2"))
    assert not v.equivalent and v.witness.description.startswith("trace a b c")


def test_checker_accepts_paths_and_text():
    path = CORPUS_DIR / "pr_vs_prtr.nplts"
    by_path = EquivalenceChecker(relation="prtr").fit(path)
    by_text = EquivalenceChecker(relation="prtr").fit(path.read_text())
    pairs = [("s1", "s2")]
    assert by_path.predict(pairs).tolist() == by_text.predict(pairs).tolist() == [True]


def test_score_counts_agreements():
    entries = {e.id: e for e in load_corpus()}
    e = entries["dis_vs_by"]
    checker = EquivalenceChecker(relation="ptr").fit(e.model())
    assert checker.score([("s1", "s2"), ("s1", "s1")], [True, False]) == (1, 2)
    with pytest.raises(ValueError):
        checker.score([("s1", "s2")], [True, True])


def test_parameters_are_plain_and_cloneable():
    checker = EquivalenceChecker(relation="pb", ct=True)
    assert clone(checker).get_params() == checker.get_params()
    assert checker.set_params(depth=4).depth == 4


@pytest.mark.parametrize("kwargs", [{"relation": "nope"}, {"depth": 0}, {"test_branch": True}])
def test_bad_parameters_fail_at_fit(corpus, kwargs):
    with pytest.raises(ValueError):
        EquivalenceChecker(**kwargs).fit(corpus("pf_vs_ptr"))


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        EquivalenceChecker().predict([("s1", "s2")])


def test_bad_pairs(corpus):
    checker = EquivalenceChecker(relation="pb").fit(corpus("pf_vs_ptr"))
    with pytest.raises(ValueError):
        checker.predict([("s1", "nowhere")])
    with pytest.raises(ValueError):
        checker.predict([])
    with pytest.raises(TypeError):
        EquivalenceChecker().fit(42)


def test_transformer_rows_follow_the_verdicts(corpus):
    m = corpus("dis_vs_by")
    t = SpectrumTransformer(relations=["ptr-dis", "ptr", "pb^ct"])
    rows = t.fit(m).transform([("s1", "s2"), ("s2", "s2")])
    assert rows.dtype == np.int8
    assert rows.tolist() == [[0, 1, 1], [1, 1, 1]]
    assert t.get_feature_names_out().tolist() == ["ptr-dis", "ptr", "pb^ct"]


def test_transformer_default_columns(corpus):
    t = SpectrumTransformer(ct=False).fit(corpus("pf_vs_ptr"))
    assert "pte-supinf" not in t.columns_ and "ptr-dis" in t.columns_
    assert t.n_features_out_ == len(t.get_feature_names_out())


def test_transformer_in_a_pipeline(corpus):
    m = corpus("pr_vs_prtr")
    pipe = make_pipeline(SpectrumTransformer(relations=["pr", "prtr"]))
    pipe.fit(m)
    assert pipe.transform([("s1", "s2")]).tolist() == [[0, 1]]
