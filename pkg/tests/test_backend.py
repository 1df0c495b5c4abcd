import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from opca.backend import (
    CNOT,
    PAULI,
    Classical,
    Fermionic,
    Qubit,
    RegionEffect,
    RegionState,
    RegionTransformation,
    basis_state,
    compose,
    is_channel,
    minimal_support,
    op_norm,
    operator_basis,
    pair,
    restrict,
    spanning_set,
    sup_norm,
    tensor,
)
from opca.constants import MIN_TOLERANCE, Tolerances, tolerances, use_tolerances
from opca.siteops import SiteSpace, apply_gate

import oracles

floats = st.floats(-1, 1, allow_nan=False, allow_infinity=False)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


# -- site spaces -------------------------------------------------------------------


@given(st.permutations(range(3)), st.integers(0, 2**32 - 1))
def test_embed_matches_kron(order, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2, 2))
    sp = SiteSpace(("x", "y", "z"), 2)
    j = order[0]
    assert np.allclose(sp.embed(A, (sp.sites[j],)), oracles.single_site(A, j, 3))


def test_embed_respects_site_order():
    sp = SiteSpace((0, 1), 2)
    assert np.allclose(sp.embed(CNOT, (1, 0)), sp.permutation({0: 1, 1: 0}) @ CNOT @ sp.permutation({0: 1, 1: 0}))


@given(st.integers(0, 2**32 - 1))
def test_support_matches_commutant_oracle(seed):
    rng = np.random.default_rng(seed)
    n = 3
    sp = SiteSpace(range(n), 2)
    which = [j for j in range(n) if rng.random() < 0.5]
    op = sp.embed(random_unitary(rng, 2 ** len(which)), which) if which else np.eye(2**n)
    assert set(sp.support(op, 1e-9)) == oracles.support(op, n) == set(which)


def test_reduce_inverts_embed():
    rng = np.random.default_rng(1)
    sp = SiteSpace(("a", "b", "c"), 2)
    A = rng.normal(size=(4, 4))
    assert np.allclose(sp.reduce(sp.embed(A, ("c", "a")), ("c", "a")), A)


def test_apply_gate_matches_dense_embedding():
    rng = np.random.default_rng(2)
    n = 4
    sp = SiteSpace(range(n), 2)
    U = random_unitary(rng, 4)
    psi = rng.normal(size=(3, 2**n)) + 0j
    out = apply_gate(psi, U, [3, 1], n, 2)
    assert np.allclose(out, psi @ sp.embed(U, (3, 1)).T)


def test_direct_sum_space():
    sp = SiteSpace(("x", "y"), 2, kind="direct_sum")
    U = np.array([[0, 1], [1, 0]])
    E = sp.embed(U, ("y",))
    assert E.shape == (4, 4)
    assert sp.support(E, 1e-9) == ("y",)


# -- region objects ---------------------------------------------------------------------


def test_tensor_and_compose():
    q = Qubit()
    X = RegionTransformation((0,), (PAULI["X"],), q)
    Z = RegionTransformation((1,), (PAULI["Z"],), q)
    XZ = tensor(X, Z)
    assert np.allclose(XZ.matrix, np.kron(PAULI["X"], PAULI["Z"]))
    both = compose(Z, X)
    assert both.region == (1, 0)
    assert np.allclose(both.matrix, np.kron(PAULI["Z"], PAULI["X"]))
    with pytest.raises(ValueError):
        tensor(X, RegionTransformation((0,), (PAULI["Z"],), q))


def test_fermionic_tensor_is_direct_sum_and_states_refuse():
    f = Fermionic(1)
    a = RegionTransformation((0,), (np.array([[1j]]),), f)
    b = RegionTransformation((1,), (np.array([[-1]]),), f)
    assert np.allclose(tensor(a, b).matrix, np.diag([1j, -1]))
    s = RegionState((0,), np.array([1.0]), f)
    with pytest.raises(NotImplementedError):
        tensor(s, RegionState((1,), np.array([1.0]), f))


def test_minimal_support_drops_identity_factors():
    q = Qubit()
    op = np.kron(np.kron(np.eye(2), PAULI["Y"]), np.eye(2))
    keep, red = minimal_support(RegionTransformation((0, 1, 2), (op,), q))
    assert keep == (1,)
    assert np.allclose(red.matrix, PAULI["Y"])


def test_classical_effect_support_and_pairing():
    c = Classical(2)
    eff = RegionEffect((0, 1), np.kron([1.0, 0.0], [1.0, 1.0]), c)
    keep, red = minimal_support(eff)
    assert keep == (0,)
    rho = basis_state((0, 1), c, (0, 1))
    assert pair(eff, rho) == 1.0
    assert np.allclose(restrict(rho, (1,)).payload, [0, 1])


def test_qubit_restrict_is_partial_trace():
    rho = basis_state((0, 1), Qubit(), (1, 0))
    assert np.allclose(restrict(rho, (0,)).payload, np.diag([0, 1]))


def test_spanning_sets_span_full_operator_space():
    for system in (Classical(2), Classical(3), Fermionic(2)):
        ops = [F.matrix.ravel() for _, F in spanning_set(system, 0)]
        assert np.linalg.matrix_rank(np.array(ops)) == system.d**2
    # Paulis together with the identity span all 2x2 matrices
    ops = [np.eye(2).ravel()] + [F.matrix.ravel() for _, F in spanning_set(Qubit(), 0)]
    assert np.linalg.matrix_rank(np.array(ops)) == 4
    assert len(operator_basis(Qubit(), (0, 1))) == 16


# -- norms ---------------------------------------------------------------------------------


@given(st.integers(2, 5).flatmap(lambda d: hnp.arrays(float, (d, d), elements=floats)))
def test_classical_sup_norm_matches_lp(A):
    t = RegionTransformation(("x",), (A,), Classical(A.shape[0]))
    assert sup_norm(t) == pytest.approx(oracles.lp_sup_norm(A), abs=1e-9)
    assert op_norm(t) == pytest.approx(sup_norm(t), abs=1e-9)


@given(hnp.arrays(float, (4, 4), elements=floats), hnp.arrays(float, (4, 4), elements=floats))
def test_classical_norms_submultiplicative(A, B):
    c = Classical(4)
    tA, tB = (RegionTransformation(("x",), (M,), c) for M in (A, B))
    tAB = RegionTransformation(("x",), (A @ B,), c)
    assert sup_norm(tAB) <= sup_norm(tA) * sup_norm(tB) + 1e-9
    assert op_norm(tAB) <= sup_norm(tA) * op_norm(tB) + 1e-9


@given(hnp.arrays(float, (3, 3), elements=st.floats(0.01, 1)))
def test_channels_have_unit_sup_norm(C):
    C = C / C.sum(axis=0)
    t = RegionTransformation(("x",), (C,), Classical(3))
    assert is_channel(t)
    assert sup_norm(t) == pytest.approx(1.0, abs=1e-9)


def test_qubit_norms():
    q = Qubit()
    U = RegionTransformation((0,), (PAULI["X"],), q)
    assert sup_norm(U) == pytest.approx(1.0)
    assert is_channel(U)
    signed = RegionTransformation((0,), (PAULI["X"], PAULI["Z"]), q, weights=(1.0, -1.0))
    with pytest.raises(NotImplementedError):
        sup_norm(signed)
    with pytest.raises(NotImplementedError):
        op_norm(U)


# -- tolerances -------------------------------------------------------------------------------


def test_tolerance_floor_and_override():
    with pytest.raises(ValueError):
        Tolerances(support=MIN_TOLERANCE / 2)
    t = tolerances().with_overrides(support=1e-6)
    with use_tolerances(t):
        assert tolerances().support == 1e-6
    assert tolerances().support == 1e-9
