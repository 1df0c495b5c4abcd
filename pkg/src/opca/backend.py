"""Finite-region effects, states and transformations for three backends.

classical   outcomes 0..d-1 per site; effects are vectors, states probability
            vectors, transformations (sub)stochastic matrices acting on columns
qubit       effects are Hermitian matrices, states density matrices,
            transformations Kraus lists with optional real weights
fermionic   one-particle (linear) sector with ``modes`` modes per site;
            states are amplitude vectors, effects and transformations are
            one-particle matrices and regions compose by direct sum

Every transformation is stored as a tuple of operator matrices ``ops`` that
transforms under a reversible evolution U as op -> U op U^-1.  For the
classical and fermionic backends the tuple has exactly one entry.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .constants import tolerances
from .siteops import SiteSpace

BACKENDS = ("classical", "qubit", "fermionic")


@dataclass(frozen=True)
class SiteSystem:
    backend: str
    d: int = 2  # outcomes (classical), 2 (qubit), modes per site (fermionic)

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.backend == "classical" and self.d < 2:
            raise ValueError("a classical site needs at least two outcomes")
        if self.backend == "qubit" and self.d != 2:
            raise ValueError("qubit sites have dimension 2")
        if self.backend == "fermionic" and self.d < 1:
            raise ValueError("a fermionic site needs at least one mode")

    @property
    def kind(self):
        return "direct_sum" if self.backend == "fermionic" else "tensor"

    @property
    def dtype(self):
        return float if self.backend == "classical" else complex

    def space(self, sites) -> SiteSpace:
        return SiteSpace(sites, self.d, self.kind)

    def dim(self, n_sites):
        return self.d**n_sites if self.kind == "tensor" else self.d * n_sites

    def describe(self):
        key = {"classical": "d", "qubit": "d", "fermionic": "modes"}[self.backend]
        return {"backend": self.backend, key: self.d}


def Classical(d=2):
    return SiteSystem("classical", d)


def Qubit():
    return SiteSystem("qubit", 2)


def Fermionic(modes=1):
    return SiteSystem("fermionic", modes)


# ---------------------------------------------------------------------------
# region objects


@dataclass(frozen=True, eq=False)
class RegionEffect:
    region: tuple
    payload: np.ndarray
    system: SiteSystem


@dataclass(frozen=True, eq=False)
class RegionState:
    region: tuple
    payload: np.ndarray
    system: SiteSystem


@dataclass(frozen=True, eq=False)
class RegionTransformation:
    region: tuple
    ops: tuple
    system: SiteSystem
    weights: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "region", tuple(self.region))
        object.__setattr__(self, "ops", tuple(np.asarray(o) for o in self.ops))
        if self.system.backend != "qubit" and len(self.ops) != 1:
            raise ValueError(f"{self.system.backend} transformations carry exactly one matrix")
        dim = self.system.dim(len(self.region))
        for o in self.ops:
            if o.shape != (dim, dim):
                raise ValueError(f"operator shape {o.shape} does not match region dimension {dim}")

    @property
    def matrix(self):
        return self.ops[0]

    @property
    def w(self):
        return self.weights if self.weights is not None else (1.0,) * len(self.ops)

    def embedded(self, sites):
        sp = self.system.space(sites)
        return [sp.embed(o, self.region) for o in self.ops]

    def map_sites(self, mapping):
        return RegionTransformation(tuple(mapping[s] for s in self.region), self.ops, self.system, self.weights)


def _check_same(x, y):
    if x.system != y.system:
        raise ValueError(f"backend mismatch: {x.system} vs {y.system}")
    if set(x.region) & set(y.region):
        raise ValueError(f"regions overlap: {set(x.region) & set(y.region)}")


def deterministic_effect(region, system) -> RegionEffect:
    region = tuple(region)
    if system.backend == "classical":
        return RegionEffect(region, np.ones(system.dim(len(region))), system)
    return RegionEffect(region, np.eye(system.dim(len(region)), dtype=complex), system)


def identity_transformation(region, system) -> RegionTransformation:
    region = tuple(region)
    return RegionTransformation(region, (np.eye(system.dim(len(region)), dtype=system.dtype),), system)


def tensor(x, y):
    _check_same(x, y)
    region = x.region + y.region
    s = x.system
    if isinstance(x, RegionTransformation) and isinstance(y, RegionTransformation):
        if s.kind == "direct_sum":
            return RegionTransformation(region, (block_diag(x.matrix, y.matrix),), s)
        ops, weights = [], []
        for (a, wa), (b, wb) in itertools.product(zip(x.ops, x.w), zip(y.ops, y.w)):
            ops.append(np.kron(a, b))
            weights.append(wa * wb)
        w = None if x.weights is None and y.weights is None else tuple(weights)
        return RegionTransformation(region, tuple(ops), s, w)
    if isinstance(x, RegionEffect) and isinstance(y, RegionEffect):
        if s.kind == "direct_sum":
            return RegionEffect(region, block_diag(x.payload, y.payload), s)
        return RegionEffect(region, np.kron(x.payload, y.payload), s)
    if isinstance(x, RegionState) and isinstance(y, RegionState):
        if s.kind == "direct_sum":
            raise NotImplementedError("the one-particle sector has no product of states")
        return RegionState(region, np.kron(x.payload, y.payload), s)
    raise TypeError(f"cannot tensor {type(x).__name__} with {type(y).__name__}")


def compose(a: RegionTransformation, b: RegionTransformation) -> RegionTransformation:
    """a after b, on the union of both regions."""
    if a.system != b.system:
        raise ValueError("backend mismatch")
    sites = a.region + tuple(s for s in b.region if s not in a.region)
    A, B = a.embedded(sites), b.embedded(sites)
    ops, weights = [], []
    for (x, wx), (y, wy) in itertools.product(zip(A, a.w), zip(B, b.w)):
        ops.append(x @ y)
        weights.append(wx * wy)
    w = None if a.weights is None and b.weights is None else tuple(weights)
    return RegionTransformation(sites, tuple(ops), a.system, w)


# ---------------------------------------------------------------------------
# supports


def minimal_support(x, tol=None):
    """Smallest region on which x acts nontrivially, with the reduced payload."""
    tol = tolerances().support if tol is None else tol
    sp = x.system.space(x.region)
    if isinstance(x, RegionEffect):
        if x.system.backend == "classical":
            keep = sp.vector_support(x.payload, tol)
            return keep, RegionEffect(keep, sp.vector_reduce(x.payload, keep), x.system)
        keep = sp.support(x.payload, tol)
        return keep, RegionEffect(keep, sp.reduce(x.payload, keep), x.system)
    if isinstance(x, RegionTransformation):
        hit = set()
        for o in x.ops:
            hit.update(sp.support(o, tol))
        keep = tuple(s for s in x.region if s in hit)
        ops = tuple(sp.reduce(o, keep) for o in x.ops)
        return keep, RegionTransformation(keep, ops, x.system, x.weights)
    raise TypeError(f"minimal_support is defined for effects and transformations, not {type(x).__name__}")


def reduce_to_support(x, tol=None):
    return minimal_support(x, tol)[1]


def same_transformation(x: RegionTransformation, y: RegionTransformation, phase=False):
    """Max-entry deviation between two transformations on the union region."""
    sites = x.region + tuple(s for s in y.region if s not in x.region)
    if len(x.ops) != len(y.ops):
        return np.inf
    dev = 0.0
    for a, b in zip(x.embedded(sites), y.embedded(sites)):
        if phase:
            b = b * _phase(a, b)
        dev = max(dev, float(np.abs(a - b).max()))
    return dev


def _phase(a, b):
    i = np.argmax(np.abs(b))
    bi = b.flat[i]
    if abs(bi) == 0:
        return 1.0
    ph = a.flat[i] / bi
    return ph / abs(ph) if abs(ph) > 0 else 1.0


# ---------------------------------------------------------------------------
# qubit process-matrix helpers


def choi(t: RegionTransformation):
    """Choi matrix sum_i w_i |K_i>><<K_i| (row-major vectorization)."""
    out = 0
    for k, w in zip(t.ops, t.w):
        v = k.reshape(-1, 1)
        out = out + w * (v @ v.conj().T)
    return out


def is_positive(t: RegionTransformation, tol=None):
    tol = tolerances().positivity if tol is None else tol
    if t.system.backend == "classical":
        return bool(t.matrix.min() >= -tol)
    if t.system.backend == "qubit":
        if t.weights is None or min(t.weights) >= 0:
            return True
        return bool(np.linalg.eigvalsh(choi(t)).min() >= -tol)
    return True


def adjoint_unit(t: RegionTransformation):
    """A^dagger applied to the deterministic effect, for qubit maps: sum w K^dag K."""
    return sum(w * (k.conj().T @ k) for k, w in zip(t.ops, t.w))


def is_channel(t: RegionTransformation, tol=None):
    tols = tolerances()
    b = t.system.backend
    if b == "classical":
        eps = tols.stochastic if tol is None else tol
        m = t.matrix
        return bool(m.min() >= -eps and np.abs(m.sum(axis=0) - 1).max() <= eps)
    if b == "qubit":
        eps = tols.equality if tol is None else tol
        unit = adjoint_unit(t)
        return bool(is_positive(t) and np.abs(unit - np.eye(unit.shape[0])).max() <= eps)
    eps = tols.equality if tol is None else tol
    m = t.matrix
    return bool(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() <= eps)


# ---------------------------------------------------------------------------
# norms


def op_norm(x):
    """Operational norm: largest |(a|rho)| over states, or for transformations
    the largest output operational norm over pure input states."""
    b = x.system.backend
    if isinstance(x, RegionEffect):
        if b == "classical":
            return float(np.abs(x.payload).max())
        return float(np.linalg.norm(x.payload, 2))
    if isinstance(x, RegionTransformation):
        if b == "classical":
            # extreme points of the simplex are the point masses; the output
            # operational norm of a signed vector is its l1 norm
            return float(max(np.abs(x.matrix[:, j]).sum() for j in range(x.matrix.shape[1])))
        if b == "fermionic":
            return float(np.linalg.norm(x.matrix, 2))
        raise NotImplementedError("operational norm of qubit transformations needs an SDP")
    raise TypeError(type(x).__name__)


def sup_norm(x):
    """inf{lambda : lambda C - A and lambda C + A lie in the cone} over channels C.

    classical transformation: the LP reduces column by column, since a column
    stochastic C with lambda C >= |A| exists iff lambda >= max column l1 norm.
    """
    b = x.system.backend
    if isinstance(x, RegionEffect):
        if b == "classical":
            return float(np.abs(x.payload).max())
        return float(np.linalg.norm(x.payload, 2))
    if isinstance(x, RegionTransformation):
        if b == "classical":
            return float(np.abs(x.matrix).sum(axis=0).max())
        if b == "fermionic":
            return float(np.linalg.norm(x.matrix, 2))
        if not is_positive(x):
            raise NotImplementedError(
                "sup-norm of a non-positive qubit transformation needs semidefinite optimization"
            )
        return float(np.linalg.norm(adjoint_unit(x), 2))
    raise TypeError(type(x).__name__)


# ---------------------------------------------------------------------------
# states


def restrict(rho: RegionState, S) -> RegionState:
    S = tuple(S)
    missing = set(S) - set(rho.region)
    if missing:
        raise ValueError(f"sites {sorted(map(str, missing))} are not in the state's region")
    sp = rho.system.space(rho.region)
    b = rho.system.backend
    if b == "classical":
        return RegionState(S, sp.vector_reduce(rho.payload, S, mode="sum"), rho.system)
    if b == "qubit":
        scale = rho.system.d ** (len(rho.region) - len(S))
        return RegionState(S, sp.reduce(rho.payload, S) * scale, rho.system)
    return RegionState(S, rho.payload[sp.modes(S)].copy(), rho.system)


def pair(a: RegionEffect, rho: RegionState) -> float:
    if set(a.region) - set(rho.region):
        raise ValueError("effect region must lie inside the state region")
    sp = a.system.space(rho.region)
    b = a.system.backend
    if b == "classical":
        full = sp.vector_embed(a.payload, a.region)
        return float(full @ rho.payload)
    if b == "qubit":
        full = sp.embed(a.payload, a.region)
        return float(np.real(np.trace(full @ rho.payload)))
    full = sp.embed(a.payload, a.region)
    psi = rho.payload
    return float(np.real(psi.conj() @ full @ psi))


def basis_state(region, system, config):
    """Product computational-basis state (classical/qubit) or mode vector."""
    region = tuple(region)
    dim = system.dim(len(region))
    if system.kind == "direct_sum":
        v = np.zeros(dim, dtype=complex)
        v[int(config)] = 1.0
        return RegionState(region, v, system)
    idx = int(np.ravel_multi_index(tuple(config), (system.d,) * len(region))) if region else 0
    v = np.zeros(dim)
    v[idx] = 1.0
    if system.backend == "qubit":
        return RegionState(region, np.outer(v, v).astype(complex), system)
    return RegionState(region, v, system)


# ---------------------------------------------------------------------------
# local operator lists

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def unit(d, i, j):
    m = np.zeros((d, d))
    m[i, j] = 1.0
    return m


def classical_function(d, f):
    """Column-stochastic matrix of a deterministic map x -> f(x)."""
    m = np.zeros((d, d))
    for x in range(d):
        m[f(x), x] = 1.0
    return m


def controlled_add(d):
    """(control, target) -> (control, target + control mod d) on two sites."""
    m = np.zeros((d * d, d * d))
    for c, t in itertools.product(range(d), repeat=2):
        m[c * d + (t + c) % d, c * d + t] = 1.0
    return m


def single_site_operators(system: SiteSystem):
    """Documented spanning list of one-site operators, with names."""
    d = system.d
    if system.backend == "classical":
        out = [("id", np.eye(d))]
        for k in range(1, d):
            out.append(("flip" if d == 2 else f"add{k}", classical_function(d, lambda x, k=k: (x + k) % d)))
        for v in range(d):
            out.append((f"reset{v}", classical_function(d, lambda x, v=v: v)))
        for v in range(d):
            out.append((f"keep{v}", unit(d, v, v)))
        if d > 2:
            for i, j in itertools.permutations(range(d), 2):
                out.append((f"move{j}to{i}", unit(d, i, j)))
        return out
    if system.backend == "qubit":
        return [(k, PAULI[k]) for k in ("X", "Y", "Z")]
    out = []
    for a, b in itertools.product(range(d), repeat=2):
        out.append((f"I+E{a}{b}", np.eye(d) + unit(d, a, b)))
    return out


def ancilla_operators(system: SiteSystem):
    """Two-site (site, ancilla) operators coupling the site to one ancilla."""
    d = system.d
    if system.backend == "classical":
        fwd = controlled_add(d)
        swap_roles = SiteSpace(("s", "a"), d).embed(fwd, ("a", "s"))
        return [("copy->anc", fwd), ("anc->site", swap_roles)]
    if system.backend == "qubit":
        return [("cnot->anc", CNOT)]
    out = []
    for a in range(d):
        m = np.eye(2 * d, dtype=complex)
        m[a, d] += 1.0
        m[d, a] += 1.0
        out.append((f"hop{a}<->anc", m))
    return out


def spanning_set(system: SiteSystem, site, ancilla=None):
    """Named local transformations at ``site`` (plus couplings to ``ancilla``)."""
    out = []
    for name, op in single_site_operators(system):
        out.append((name, RegionTransformation((site,), (op.astype(system.dtype),), system)))
    if ancilla is not None:
        for name, op in ancilla_operators(system):
            out.append((name, RegionTransformation((site, ancilla), (op.astype(system.dtype),), system)))
    return out


def operator_basis(system: SiteSystem, sites):
    """A basis of all operators on ``sites``: products of one-site bases for
    tensor backends, I + E_ab over the joint modes for the one-particle sector."""
    sites = tuple(sites)
    d = system.d
    if system.kind == "direct_sum":
        n = d * len(sites)
        return [
            (f"I+E{a}{b}", np.eye(n, dtype=complex) + unit(n, a, b))
            for a, b in itertools.product(range(n), repeat=2)
        ]
    if system.backend == "qubit":
        local = list(PAULI.items())
    else:
        local = [(f"E{i}{j}", unit(d, i, j)) for i, j in itertools.product(range(d), repeat=2)]
    out = []
    for combo in itertools.product(local, repeat=len(sites)):
        name = "⊗".join(c[0] for c in combo)
        op = np.ones((1, 1), dtype=system.dtype)
        for _, m in combo:
            op = np.kron(op, m)
        out.append((name, op))
    return out
