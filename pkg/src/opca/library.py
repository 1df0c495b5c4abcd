"""Bundled presentations, rules and automata used by tests, scripts and selftest."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.linalg import expm

from . import gf2
from .automaton import (
    LocalRule,
    RuleError,
    WrappedAutomaton,
    assemble,
    dressed_swap_block,
    from_blocks,
    from_global,
    linear_block,
    swap_block,
)
from .backend import PAULI, Classical, Fermionic, Qubit, SiteSystem
from .cayley import CayleyGraph, build_graph
from .group_engine import (
    QuotientMap,
    cyclic_presentation,
    free_abelian_presentation,
)

# fixed single-qubit dressing used by the partial-swap and tilted cluster rules
DRESSING = expm(-1j * (0.3 * PAULI["Y"] + 0.2 * PAULI["Z"]))
CZ = np.diag([1, 1, 1, -1]).astype(complex)

HADAMARD_WALK = (
    np.array([[1, 1], [0, 0]]) / np.sqrt(2),
    np.array([[0, 0], [1, -1]]) / np.sqrt(2),
)
UNBALANCED_WALK = (
    np.array([[0.8, 0.7], [0, 0]]),
    np.array([[0, 0], [0.7, -0.8]]),
)


# -- presentations -----------------------------------------------------------


def Z(n=None):
    return free_abelian_presentation(1) if n is None else cyclic_presentation(n)


def Z2():
    return free_abelian_presentation(2)


def torus(m, n):
    return cyclic_presentation(m, n)


def figure_quotients():
    """The two torus quotients of Z^2 with their expected hypothesis levels."""
    return [
        (QuotientMap(Z2(), torus(6, 5)), "pedantic"),
        (QuotientMap(Z2(), torus(8, 7)), "pedantic2"),
    ]


# -- rules ---------------------------------------------------------------------


def shift_rule(system: SiteSystem | None = None, offset="a"):
    system = system or Qubit()
    return LocalRule((offset,), system, swap_block(system, 1, 0), 2, f"shift[{system.backend}]")


def identity_rule(system: SiteSystem | None = None):
    system = system or Qubit()
    return LocalRule(("1",), system, swap_block(system, 1, 0), 1, f"identity[{system.backend}]")


def partial_swap_rule(u=DRESSING):
    """Shift dressed by a fixed one-qubit unitary: V = shift o (x)u."""
    s = Qubit()
    return LocalRule(("a",), s, dressed_swap_block(s, 1, 0, u), 2, "partial-swap")


def tilted_cluster_rule(u=DRESSING):
    """On Z^2: dress each site with u, shift along b, then CZ on every a-edge.

    N+_e = {b a^-1, b, b a}.
    """
    s = Qubit()
    G = np.kron(CZ, np.eye(2)) @ np.kron(np.eye(2), CZ) @ np.kron(np.kron(np.eye(2), u), np.eye(2))
    return LocalRule(("ba^-1", "b", "ba"), s, dressed_swap_block(s, 3, 1, G), 4, "tilted-cluster")


def linear_fermionic_rule(coefficients, offsets, modes, name="linear-walk"):
    return LocalRule(
        tuple(offsets), Fermionic(modes), linear_block(coefficients, modes), 2, name,
        coefficients=tuple(np.asarray(T, dtype=complex) for T in coefficients),
    )


def hadamard_walk_rule():
    return linear_fermionic_rule(HADAMARD_WALK, ("a", "a^-1"), 2, "hadamard-walk")


def conditional_shift_walk_rule():
    """Two-mode walk on Z^2: mode 0 hops along a, mode 1 along b, after a Hadamard coin."""
    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    return linear_fermionic_rule((P0 @ H, P1 @ H), ("a", "b"), 2, "conditional-shift-walk")


# -- explicit global rules ------------------------------------------------------


def linear_gf2_permutation(M):
    """Configuration permutation x -> M x (mod 2), first site most significant."""
    M = np.asarray(M, dtype=np.uint8)
    n = M.shape[0]
    configs = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8)
    images = gf2.matmul(configs, M.T)
    weights = 2 ** np.arange(n - 1, -1, -1)
    src = configs @ weights
    dst = images.astype(np.int64) @ weights
    if len(set(dst.tolist())) != len(dst):
        raise RuleError("GF(2) matrix is singular; the rule is not reversible")
    V = np.zeros((2**n, 2**n))
    V[dst, src] = 1.0
    return V


def gf2_rule_matrix(graph: CayleyGraph, offsets):
    """b'_g = sum over h of b_{g h} (mod 2)."""
    n = len(graph.vertices)
    M = np.zeros((n, n), dtype=np.uint8)
    for g in graph.vertices:
        for h in offsets:
            M[graph.index(g), graph.index(graph.mul(g, h))] ^= 1
    return M


XOR_OFFSETS = ("a^-1", "1", "a")


def xor_automaton(r=4):
    graph = build_graph(Z(r))
    M = gf2_rule_matrix(graph, XOR_OFFSETS)
    return from_global(linear_gf2_permutation(M), graph, Classical(2), name=f"xor-Z{r}")


# -- assembled automata ----------------------------------------------------------


def shift_automaton(system=None, n=8):
    return assemble(shift_rule(system), build_graph(Z(n)))


def identity_automaton(system=None, n=8):
    return assemble(identity_rule(system), build_graph(Z(n)))


def partial_swap_automaton(n=8):
    return assemble(partial_swap_rule(), build_graph(Z(n)))


def hadamard_walk_automaton(n=8):
    return assemble(hadamard_walk_rule(), build_graph(Z(n)))


def tilted_cluster_automaton(m=6, n=5):
    """Blocks only: 30 qubits are far beyond the dense limit."""
    rule = tilted_cluster_rule()
    graph = build_graph(torus(m, n))
    auto = WrappedAutomaton(graph, rule.system, {}, rule, None, rule.name)
    for g in graph.vertices:
        auto.block(g)
    return auto


PERTURBED_SITE = (3,)


def site_perturbed_automaton(n=8, site=PERTURBED_SITE):
    """Qubit shift on Z_n whose block at one site is the dressed swap."""
    graph = build_graph(Z(n))
    plain, odd = shift_rule(Qubit()), partial_swap_rule()
    blocks = {}
    for g in graph.vertices:
        rule = odd if g == site else plain
        blocks[g] = rule.instantiate(graph, g)
    return from_blocks(blocks, graph, Qubit(), name=f"shift-perturbed-at-{site[0]}")


def bundled_automata():
    """Homogeneous automata used by the invertibility and invariance checks."""
    return {
        "shift-classical-Z8": shift_automaton(Classical(2)),
        "shift-qubit-Z8": shift_automaton(Qubit()),
        "identity-qubit-Z8": identity_automaton(Qubit()),
        "partial-swap-Z8": partial_swap_automaton(),
        "xor-Z4": xor_automaton(4),
        "hadamard-walk-Z8": hadamard_walk_automaton(),
        "tilted-cluster-Z6xZ5": tilted_cluster_automaton(),
    }
