import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from opca.group_engine import (
    CyclicProduct,
    FiniteTable,
    FreeAbelian,
    GeneratorSymbol,
    PresentationError,
    QuotientMap,
    Word,
    WordError,
    cyclic_presentation,
    evaluate,
    free_abelian_presentation,
    free_group_presentation,
    free_reduce,
    parse_presentation,
    tokenize,
    word,
)

symbols = st.builds(GeneratorSymbol, st.sampled_from("ab"), st.sampled_from((1, -1)))
raw_words = st.lists(symbols, max_size=12)


def test_word_printing_compresses_runs():
    assert str(word("a^3 b a^-1 a")) == "a^3b"
    assert str(word("ab^-2")) == "ab^-2"
    assert str(word("1")) == "1"
    assert word("λ").is_identity()


def test_tokenize_reports_columns():
    toks = tokenize("a^2b^-1", ["a", "b"])
    assert [(str(s), c) for s, c in toks] == [("a", 1), ("a", 1), ("b^-1", 4)]
    with pytest.raises(WordError) as err:
        tokenize("ab?", ["a", "b"])
    assert err.value.column == 3


def test_word_rejects_unreduced_symbols():
    a, A = GeneratorSymbol("a"), GeneratorSymbol("a", -1)
    with pytest.raises(WordError):
        Word((a, A))


@given(raw_words)
def test_free_reduce_is_idempotent(ws):
    w = free_reduce(ws)
    assert free_reduce(w.symbols) == w
    for x, y in zip(w.symbols, w.symbols[1:]):
        assert not (x.label == y.label and x.sign == -y.sign)


@given(raw_words, raw_words)
def test_inverse_cancels(u, v):
    w = free_reduce(u)
    assert (w * w.inverse()).is_identity()
    assert (free_reduce(u) * free_reduce(v)).inverse() == free_reduce(v).inverse() * free_reduce(u).inverse()


@given(raw_words, raw_words)
def test_evaluation_is_a_homomorphism(u, v):
    u, v = free_reduce(u), free_reduce(v)
    for p in (cyclic_presentation(6, 5), free_abelian_presentation(2)):
        m = p.model
        assert evaluate(u * v, m) == m.multiply(evaluate(u, m), evaluate(v, m))


@given(raw_words)
def test_free_window_elements_are_reduced_words(u):
    p = free_group_presentation(("a", "b"), 12)
    w = free_reduce(u)
    assert p.evaluate(w) == w


def test_cyclic_model_identities():
    p = cyclic_presentation(4)
    assert p.is_identity(word("a^4"))
    assert not p.is_identity(word("a^2"))
    assert cyclic_presentation(2).self_inverse("a")
    assert not p.self_inverse("a")


def test_finite_table_checks_associativity():
    t = FiniteTable(("e", "s"), ((0, 1), (1, 0)), {"a": "s"})
    assert t.multiply("s", "s") == "e"
    with pytest.raises(PresentationError):
        FiniteTable(("e", "s", "t"), ((0, 1, 2), (1, 0, 0), (2, 0, 0)), {"a": "s"})


def test_presentation_json_round_trip():
    p = cyclic_presentation(6, 5)
    q = parse_presentation(json.dumps(p.to_json()))
    assert q.generators == p.generators
    assert q.relators == p.relators
    assert isinstance(q.model, CyclicProduct)
    assert isinstance(parse_presentation(json.dumps(free_abelian_presentation(2).to_json())).model, FreeAbelian)


def test_unreduced_relator_reports_line_and_column():
    raw = '{"generators": ["a"],\n "relators": ["a a^-1 a"], "model": {"cyclic": [3]}}'
    with pytest.raises(PresentationError) as err:
        parse_presentation(raw)
    assert (err.value.line, err.value.column) == (2, 18)


def test_malformed_json_reports_position():
    with pytest.raises(PresentationError) as err:
        parse_presentation('{"generators": ["a"],\n "relators": ["a" }')
    assert err.value.line == 2


def test_relator_must_hold_in_model():
    raw = '{"generators": ["a"], "relators": ["a^3"], "model": {"cyclic": [4]}}'
    with pytest.raises(PresentationError):
        parse_presentation(raw)


def test_quotient_map_needs_matching_generators():
    with pytest.raises(PresentationError):
        QuotientMap(free_abelian_presentation(2), cyclic_presentation(5))
    q = QuotientMap(free_abelian_presentation(2), cyclic_presentation(6, 5))
    assert [str(r) for r in q.extra_relators] == ["a^6", "b^5"]
