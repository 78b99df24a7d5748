"""Exact equivalence checking for nondeterministic and probabilistic labelled transition systems."""

from .dsl import DslSyntaxError, load, parse_dsl, serialize
from .estimator import EquivalenceChecker, SpectrumTransformer
from .events import ALL, describe, event_prob, extremal, parse_query
from .lp import LinearFeasibilityProblem, lp_feasible
from .model import Distribution, Nplts, Transition, ValidationError, build, disjoint_union, validate
from .relations import RELATIONS, check, lookup
from .resolutions import enumerate_resolutions, in_res_alpha
from .spectrum import SpectrumInconsistency, fuzz, random_model, run_corpus, run_spectrum
from .testing import check_pte, interact, search_distinguishing_test
from .verdict import Verdict, Witness

__all__ = [
    "ALL", "DslSyntaxError", "Distribution", "EquivalenceChecker", "LinearFeasibilityProblem", "Nplts",
    "RELATIONS", "SpectrumInconsistency", "SpectrumTransformer", "Transition", "ValidationError", "Verdict",
    "Witness", "build", "check", "check_pte", "describe", "disjoint_union", "enumerate_resolutions",
    "event_prob", "extremal", "fuzz", "in_res_alpha", "interact", "load", "lookup", "lp_feasible",
    "parse_dsl", "parse_query", "random_model", "run_corpus", "run_spectrum", "search_distinguishing_test",
    "serialize", "validate",
]
__version__ = "0.1.0"
