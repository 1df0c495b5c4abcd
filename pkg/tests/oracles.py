"""Independent reference computations.

Nothing here uses the package's matrix or graph code: groups are handled with
modular arithmetic, classical rules as functions on bit tuples, and qubit
evolutions as explicitly built permutation matrices.
"""

import itertools

import numpy as np
from scipy.optimize import linprog


# -- groups -------------------------------------------------------------------


def torus_distance(x, y, moduli):
    return sum(min((a - b) % m, (b - a) % m) for a, b, m in zip(x, y, moduli))


def lattice_ball(dim, radius):
    out = set()
    for v in itertools.product(range(-radius, radius + 1), repeat=dim):
        if sum(map(abs, v)) <= radius:
            out.add(v)
    return out


def quotient_level_oracle(moduli):
    """Level reached by Z^k -> prod Z_m, enumerating the alternating words as
    integer vectors: h_a - h_b (+ h_c - h_d (+ h_e - h_f))."""
    k = len(moduli)
    gens = []
    for i in range(k):
        for s in (1, -1):
            v = [0] * k
            v[i] = s
            gens.append(tuple(v))

    def agrees(length):
        for combo in itertools.product(gens, repeat=length):
            total = [0] * k
            for j, g in enumerate(combo):
                sign = 1 if j % 2 == 0 else -1
                total = [t + sign * x for t, x in zip(total, g)]
            in_source = all(t == 0 for t in total)
            in_target = all(t % m == 0 for t, m in zip(total, moduli))
            if in_source != in_target:
                return False
        return True

    if not (agrees(2) and agrees(4)):
        return "none"
    return "pedantic2" if agrees(6) else "pedantic"


# -- GF(2) ----------------------------------------------------------------------


def xor_images(r):
    """x -> (x_{j-1} + x_j + x_{j+1}) for every configuration of Z_r."""
    out = {}
    for x in itertools.product((0, 1), repeat=r):
        out[x] = tuple(x[(j - 1) % r] ^ x[j] ^ x[(j + 1) % r] for j in range(r))
    return out


def xor_invertible(r):
    return len(set(xor_images(r).values())) == 2**r


def _support_of_map(T, r):
    """Sites a deterministic map on bit tuples reads or writes."""
    hit = set()
    for x in itertools.product((0, 1), repeat=r):
        y = T(x)
        for j in range(r):
            if y[j] != x[j]:
                hit.add(j)
            flipped = list(x)
            flipped[j] ^= 1
            if T(tuple(flipped)) != tuple(yy if i != j else yy ^ 1 for i, yy in enumerate(y)):
                hit.add(j)
    return hit


def xor_causal_oracle(r, g):
    """Support of V F V^-1 for F in flip/reset0/reset1 at g, by composing functions."""
    fwd = xor_images(r)
    back = {v: k for k, v in fwd.items()}
    local = [
        lambda x: x[:g] + (x[g] ^ 1,) + x[g + 1:],
        lambda x: x[:g] + (0,) + x[g + 1:],
        lambda x: x[:g] + (1,) + x[g + 1:],
    ]
    hit = set()
    for F in local:
        hit |= _support_of_map(lambda x, F=F: fwd[F(back[x])], r)
    return hit


def xor_signalling_oracle(r, g):
    """Sites whose output bit depends on the input bit at g."""
    fwd = xor_images(r)
    hit = set()
    for x in itertools.product((0, 1), repeat=r):
        y = list(x)
        y[g] ^= 1
        a, b = fwd[x], fwd[tuple(y)]
        hit |= {j for j in range(r) if a[j] != b[j]}
    return hit


# -- qubits --------------------------------------------------------------------------


def shift_permutation(n, d=2):
    """Site content moves from j to j + 1 (mod n); first site most significant."""
    V = np.zeros((d**n, d**n))
    for x in itertools.product(range(d), repeat=n):
        y = tuple(x[(j - 1) % n] for j in range(n))
        V[np.ravel_multi_index(y, (d,) * n), np.ravel_multi_index(x, (d,) * n)] = 1
    return V


def single_site(op, j, n):
    out = np.eye(1)
    for i in range(n):
        out = np.kron(out, op if i == j else np.eye(op.shape[0]))
    return out


def support(op, n, d=2, tol=1e-9):
    """Sites j where op fails to commute with some matrix unit on j (the
    commutant of the full algebra at j is exactly the operators X (x) I_j)."""
    hit = set()
    for j in range(n):
        for a, b in itertools.product(range(d), repeat=2):
            E = np.zeros((d, d))
            E[a, b] = 1
            U = single_site(E, j, n)
            if np.abs(op @ U - U @ op).max() > tol:
                hit.add(j)
                break
    return hit


# -- norms -----------------------------------------------------------------------------


def lp_sup_norm(A):
    """min lambda s.t. lambda C +- A >= 0 for a column-stochastic C, as an LP in (C, lambda)
    after the substitution D = lambda C."""
    n_out, n_in = A.shape
    nD = n_out * n_in
    c = np.zeros(nD + 1)
    c[-1] = 1
    A_eq = np.zeros((n_in, nD + 1))
    for j in range(n_in):
        for i in range(n_out):
            A_eq[j, i * n_in + j] = 1
        A_eq[j, -1] = -1
    A_ub = np.zeros((2 * nD, nD + 1))
    b_ub = np.zeros(2 * nD)
    for k, a in enumerate(A.ravel()):
        # D_k >= a and D_k >= -a
        A_ub[2 * k, k] = -1
        b_ub[2 * k] = -a
        A_ub[2 * k + 1, k] = -1
        b_ub[2 * k + 1] = a
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.zeros(n_in), bounds=[(None, None)] * (nD + 1))
    return res.fun
