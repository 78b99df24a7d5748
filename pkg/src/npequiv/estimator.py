"""scikit-learn style front end.

A fitted model plays the role of training data; pairs of state ids are the
samples.  Outputs are integer or boolean arrays, never floats.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .relations import RELATIONS, check
from .spectrum import SpectrumOptions, relation_ids
from .trace_equiv import TraceAnalyzer
from .validation import check_bound, check_model, check_pairs, check_relation


class EquivalenceChecker(BaseEstimator):
    """Decide one relation for pairs of states of a fitted model.

    >>> checker = EquivalenceChecker(relation="pb").fit(model)
    >>> checker.predict([("s1", "s2")])
    array([ True])
    """

    def __init__(self, relation: str = "pctr-supinf", ct: bool = False, depth: int | None = None,
                 test_depth: int = 3, test_branch: int = 3):
        self.relation = relation
        self.ct = ct
        self.depth = depth
        self.test_depth = test_depth
        self.test_branch = test_branch

    def fit(self, X, y=None):
        self.relation_ = check_relation(self.relation)
        check_bound(self.depth, "depth")
        check_bound(self.test_depth, "test_depth")
        check_bound(self.test_branch, "test_branch")
        self.model_ = check_model(X)
        self.states_ = tuple(self.model_.states)
        self.n_states_ = len(self.states_)
        return self

    def decide(self, pairs) -> list:
        """Full verdicts, with witnesses."""
        check_is_fitted(self, "model_")
        return [check(self.relation_, self.model_, s1, s2, ct=self.ct, depth=self.depth,
                      test_depth=self.test_depth, test_branch=self.test_branch)
                for s1, s2 in check_pairs(pairs, self.model_)]

    def predict(self, pairs) -> np.ndarray:
        return np.array([v.equivalent for v in self.decide(pairs)], dtype=bool)

    def score(self, pairs, y) -> tuple[int, int]:
        """(agreements, total) against expected booleans; exact, unlike a ratio."""
        got = self.predict(pairs)
        expected = np.asarray(y, dtype=bool)
        if expected.shape != got.shape:
            raise ValueError(f"expected {got.shape[0]} labels, got {expected.shape}")
        return int((got == expected).sum()), int(got.shape[0])


class SpectrumTransformer(TransformerMixin, BaseEstimator):
    """Map each pair to a row of 0/1 flags, one column per relation."""

    def __init__(self, relations=None, testing: bool = False, ct: bool = True, depth: int | None = None):
        self.relations = relations
        self.testing = testing
        self.ct = ct
        self.depth = depth

    def fit(self, X, y=None):
        check_bound(self.depth, "depth")
        self.model_ = check_model(X)
        available = relation_ids(SpectrumOptions(testing=self.testing, ct=self.ct))
        if self.relations is None:
            self.columns_ = tuple(available)
        else:
            cols = []
            for rid in self.relations:
                base, ct = (rid[:-3], "^ct") if rid.endswith("^ct") else (rid, "")
                cols.append(check_relation(base) + ct)
            self.columns_ = tuple(cols)
        self.n_features_out_ = len(self.columns_)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        pairs = check_pairs(X, self.model_)
        out = np.zeros((len(pairs), len(self.columns_)), dtype=np.int8)
        for i, (s1, s2) in enumerate(pairs):
            analyzer = None
            for j, rid in enumerate(self.columns_):
                base, ct = (rid[:-3], True) if rid.endswith("^ct") else (rid, False)
                if analyzer is None and RELATIONS[base].kind == "trace":
                    analyzer = TraceAnalyzer(self.model_, s1, s2, self.depth)
                verdict = check(base, self.model_, s1, s2, ct=ct, depth=self.depth, analyzer=analyzer)
                out[i, j] = int(verdict.equivalent)
        return out

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        check_is_fitted(self, "columns_")
        return np.array(self.columns_, dtype=object)
