import pytest

from opca.group_engine import QuotientMap, cyclic_presentation, free_abelian_presentation
from opca.quotient import check_level, check_pedantic, check_pedantic2

import oracles

# frozen from the integer-vector enumeration in oracles.quotient_level_oracle
Z_TO_ZN = {1: "none", 2: "none", 3: "pedantic", 4: "none", 5: "pedantic2", 6: "pedantic",
           7: "pedantic2", 8: "pedantic2", 9: "pedantic2", 10: "pedantic2"}


@pytest.mark.parametrize("n", sorted(Z_TO_ZN))
def test_cyclic_quotients(n):
    assert oracles.quotient_level_oracle((n,)) == Z_TO_ZN[n]
    rep = check_level(QuotientMap(free_abelian_presentation(1), cyclic_presentation(n)), "pedantic2")
    assert rep.level_reached == Z_TO_ZN[n]


@pytest.mark.parametrize("moduli", [(6, 5), (8, 7), (4, 4), (3, 3), (5, 5), (7, 6)])
def test_torus_quotients_match_oracle(moduli):
    rep = check_level(QuotientMap(free_abelian_presentation(2), cyclic_presentation(*moduli)), "pedantic2")
    assert rep.level_reached == oracles.quotient_level_oracle(moduli)


def test_pedantic_only_quotient_has_a_length_six_witness():
    q = QuotientMap(free_abelian_presentation(2), cyclic_presentation(6, 5))
    assert check_pedantic(q).passed
    rep = check_pedantic2(q)
    assert not rep.passed
    assert rep.level_reached == "pedantic"
    assert rep.violations and all(v["length"] == 6 for v in rep.violations)
    assert rep.violations[0]["reduced"] == "a^6"
    assert rep.violations[0]["word"] == "a a a a a a"
    assert rep.violation_counts[6] > 0
    assert "alternating" in rep.to_json()["note"]


def test_enumeration_counts():
    q = QuotientMap(free_abelian_presentation(2), cyclic_presentation(8, 7))
    rep = check_pedantic2(q)
    assert rep.enumeration_counts == {2: 4**2, 4: 4**4, 6: 4**6}
    assert rep.passed
