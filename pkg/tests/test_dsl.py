from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npequiv import DslSyntaxError, ValidationError, load, parse_dsl, serialize
from npequiv.model import DistributionSum
from npequiv.spectrum import CORPUS_DIR, random_model


def shape(model):
    return (sorted(model.states),
            sorted((t.source, t.label, t.target.items) for t in model.transitions),
            tuple(model.designated), sorted(model.success))


def test_one_state_model():
    m = parse_dsl("nplts T { state s { } }")
    assert m.name == "T" and m.states == ("s",)


def test_decimals_become_exact_fractions():
    m = parse_dsl("nplts T { state s { a -> { t: 0.68, u: 0.32 }; } state t { } state u { } }")
    assert m.outgoing("s")[0].target["t"] == Fraction(17, 25)


def test_overfull_distribution():
    with pytest.raises(ValidationError) as err:
        parse_dsl("nplts T { state s { a -> { t: 0.5, u: 0.6 }; } state t { } state u { } }")
    assert isinstance(err.value.issues[0], DistributionSum)


def test_syntax_error_position():
    text = "nplts T {\n  state s {\n    a -> { t 1 };\n  }\n}"
    with pytest.raises(DslSyntaxError) as err:
        parse_dsl(text)
    assert (err.value.line, err.value.column) == (3, 14)
    assert "':'" in err.value.expected


def test_zero_denominator():
    with pytest.raises(DslSyntaxError):
        parse_dsl("nplts T { state s { a -> { s: 1/0 }; } }")


def test_comments_and_markers():
    m = parse_dsl("""# a test
    nplts T {  # trailing
      designated o;
      success w;
      state o { tau -> { w: 1 }; }
      state w { }
    }""")
    assert m.designated == ("o",) and m.success == {"w"}


def test_offer_sides_parse_with_three_offers():
    m = load(CORPUS_DIR / "dis_vs_by.nplts")
    assert [t.label for t in m.outgoing("s1")] == ["offer"] * 3
    assert m.outgoing("s1")[0].target["l1"] == Fraction(2, 5)


@pytest.mark.parametrize("path", sorted(CORPUS_DIR.glob("*.nplts")), ids=lambda p: p.stem)
def test_corpus_files_round_trip(path):
    m = load(path)
    assert shape(parse_dsl(serialize(m))) == shape(m)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 7), st.booleans())
def test_serialize_then_parse_is_identity(seed, states, acyclic):
    m = random_model(seed, states, max_branch=3, acyclic=acyclic)
    again = parse_dsl(serialize(m))
    assert shape(again) == shape(m)
    assert serialize(again) == serialize(m)
