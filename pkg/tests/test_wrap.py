import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opca import library
from opca.backend import PAULI, Classical, Qubit, RegionTransformation
from opca.cayley import build_graph
from opca.group_engine import QuotientMap, cyclic_presentation, free_abelian_presentation
from opca.wrap import (
    SafeRadiusError,
    fermionic_unitarity,
    injectivity_radius,
    one_particle_matrix,
    phi_map,
    shortest_kernel_length,
    wrap_verify,
)

Z_TO_Z8 = QuotientMap(free_abelian_presentation(1), cyclic_presentation(8))
Z2_TO_T65 = QuotientMap(free_abelian_presentation(2), cyclic_presentation(6, 5))
Z2_TO_T87 = QuotientMap(free_abelian_presentation(2), cyclic_presentation(8, 7))
LINE = build_graph(free_abelian_presentation(1), window_radius=16)
Z8 = build_graph(cyclic_presentation(8))


def test_kernel_lengths_and_radii():
    assert shortest_kernel_length(Z_TO_Z8) == 8
    assert injectivity_radius(Z_TO_Z8) == 3
    assert shortest_kernel_length(Z2_TO_T65) == 5
    assert injectivity_radius(Z2_TO_T65) == 2
    assert injectivity_radius(Z2_TO_T87) == 3


def test_phi_wraps_the_line():
    phi = phi_map(LINE, Z_TO_Z8, Z8)
    assert phi[(0,)] == (0,)
    assert phi[(-1,)] == (7,)
    assert phi[(9,)] == (1,)


@pytest.mark.parametrize("system", [Qubit(), Classical(2)])
def test_shift_matches_and_corruption_is_caught(system):
    rule = library.shift_rule(system)
    rep = wrap_verify(rule, LINE, Z8, Z_TO_Z8, steps=3)
    assert rep.verdict == "match"
    assert rep.max_deviation == 0.0
    assert rep.rule_valid_on_source and rep.rule_valid_on_target
    assert rep.safe_radius_used == 4
    bad = wrap_verify(rule, LINE, Z8, Z_TO_Z8, steps=3, target_rule=rule.perturbed(1e-3))
    assert bad.verdict == "mismatch"
    assert bad.max_deviation >= 1e-4
    assert bad.rule_valid_on_target is False


def test_partial_swap_matches():
    rep = wrap_verify(library.partial_swap_rule(), LINE, Z8, Z_TO_Z8, steps=2)
    assert rep.verdict == "match"
    assert rep.max_deviation < 1e-12


@given(st.integers(-5, 5), st.integers(1, 3))
def test_comparison_is_sound_away_from_the_identity(b, steps):
    rep = wrap_verify(library.shift_rule(), LINE, Z8, Z_TO_Z8, steps=steps, base=(b,))
    assert rep.verdict == "match"


def test_radius_limits_are_enforced():
    with pytest.raises(SafeRadiusError):
        wrap_verify(library.shift_rule(), LINE, Z8, Z_TO_Z8, steps=4)
    small = build_graph(free_abelian_presentation(1), window_radius=2)
    with pytest.raises(SafeRadiusError):
        wrap_verify(library.shift_rule(), small, Z8, Z_TO_Z8, steps=2)


def test_custom_observable_with_an_ancilla():
    F = RegionTransformation(((0,), ("anc", 0)), (np.kron(PAULI["X"], PAULI["Z"]),), Qubit())
    rep = wrap_verify(library.shift_rule(), LINE, Z8, Z_TO_Z8, observables=[("XZ", F)], steps=2)
    assert rep.verdict == "match"
    assert [c[:2] for c in rep.comparison] == [("XZ", 1), ("XZ", 2)]


def test_tilted_cluster_on_the_torus():
    plane = build_graph(free_abelian_presentation(2), window_radius=6)
    torus = build_graph(cyclic_presentation(6, 5))
    rep = wrap_verify(library.tilted_cluster_rule(), plane, torus, Z2_TO_T65, steps=1)
    assert rep.verdict == "match"
    assert rep.max_deviation < 1e-12
    with pytest.raises(SafeRadiusError):
        wrap_verify(library.tilted_cluster_rule(), plane, torus, Z2_TO_T65, steps=2)


def test_fermionic_walk_needs_pedantic2():
    plane = build_graph(free_abelian_presentation(2), window_radius=6)
    rule = library.conditional_shift_walk_rule()
    refused = wrap_verify(rule, plane, build_graph(cyclic_presentation(6, 5)), Z2_TO_T65)
    assert refused.verdict == "hypotheses-failed"
    assert refused.comparison == []
    assert refused.quotient_report.level_reached == "pedantic"
    ok = wrap_verify(rule, plane, build_graph(cyclic_presentation(8, 7)), Z2_TO_T87)
    assert ok.verdict == "match"
    assert ok.to_json()["verdict"] == "match"


def test_unitarity_of_linear_walks():
    ok, res, nbhd = fermionic_unitarity(library.HADAMARD_WALK, ("a", "a^-1"), Z8, 2)
    assert ok and res < 1e-12
    assert nbhd == [(1,), (7,)]
    # a plain conditional shift is a permutation matrix
    P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    ok, res, _ = fermionic_unitarity((P0, P1), ("a", "a^-1"), Z8, 2)
    assert ok and res == 0.0
    U = one_particle_matrix((P0, P1), ("a", "a^-1"), Z8, 2)
    assert np.all((U == 0) | (U == 1))
    ok, res, _ = fermionic_unitarity(library.UNBALANCED_WALK, ("a", "a^-1"), Z8, 2)
    assert not ok and res > 0.1


def test_unitarity_agrees_with_assembled_walk():
    auto = library.hadamard_walk_automaton(8)
    U = one_particle_matrix(library.HADAMARD_WALK, ("a", "a^-1"), Z8, 2)
    assert np.allclose(auto.V, U)
