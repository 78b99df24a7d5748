from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from npequiv import LinearFeasibilityProblem, lp_feasible

F = Fraction


def test_single_variable_must_be_one():
    assert lp_feasible(LinearFeasibilityProblem.convex(1)) == (1,)


def offer_problem(target_win1):
    # basis: the two offers of the coarser side, expressed as win1 mass
    prob = LinearFeasibilityProblem.convex(2)
    prob.add([F(7, 10), F(3, 10)], "==", target_win1)
    return prob


def test_even_mix_of_two_offers():
    assert lp_feasible(offer_problem(F(1, 2))) == (F(1, 2), F(1, 2))


def test_mix_outside_the_hull():
    assert lp_feasible(offer_problem(F(4, 5))) is None


def test_floats_are_rejected():
    prob = LinearFeasibilityProblem.convex(2)
    with pytest.raises(TypeError):
        prob.add([0.5, 0.5], "<=", 1)
    with pytest.raises(ValueError):
        prob.add([1, 1], "<", 1)


def test_contradiction():
    prob = LinearFeasibilityProblem.convex(3)
    prob.add([1, 0, 0], ">=", F(2, 3))
    prob.add([0, 1, 1], ">=", F(1, 2))
    assert lp_feasible(prob) is None


fractions = st.fractions(min_value=-2, max_value=2, max_denominator=6)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.lists(fractions, min_size=n, max_size=n), st.sampled_from(["==", "<=", ">="]), fractions),
             max_size=3))))
def test_agrees_with_vertex_enumeration(case):
    n, extra = case
    prob = LinearFeasibilityProblem.convex(n)
    for coeffs, op, rhs in extra:
        prob.add(coeffs, op, rhs)
    got = lp_feasible(prob)
    rows = [(c.coefficients, c.op, c.rhs) for c in prob.constraints]
    brute = oracles.lp_vertex_search(n, rows)
    assert (got is None) == (brute is None)
    if got is not None:
        assert all(c.satisfied(got) for c in prob.constraints)
        assert all(type(v) is Fraction for v in got)
