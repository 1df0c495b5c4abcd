"""Local rules, block assembly on the doubled lattice, evolution and extraction.

Doubled-lattice sites are pairs ``(vertex, layer)`` with layer 0 or 1.  The
block of a site g acts on ``(N+_g, 0)`` followed by ``(g, 1)``.  The doubled
evolution is W = (prod_g S'_g) S where S swaps the two layers; on valid rules
W = V (x) V^-1, and V is recovered by preparing layer 1 in a fixed basis
state, applying W and discarding layer 1.

Orientation: forward evolution is F -> V F V^-1.  For the shift rule with
offset a this moves an operator from g to g·a, so the support of a forward
evolved operator at R lies in N+_R and a backward evolved one in N-_R.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .backend import (
    RegionTransformation,
    SiteSystem,
    operator_basis,
    unit,
)
from .cayley import CayleyGraph, ClippingError, NeighborhoodScheme
from .constants import (
    tolerances,
    MAX_GLOBAL_DIM,
    MAX_LOCAL_DIM,
    MAX_SWEEP_DIM,
)
from .siteops import SiteSpace, apply_gate, max_abs

ANCILLA = ("anc", 0)


class RuleError(ValueError):
    """Rule cannot be instantiated or failed validation."""


class ProbeTooSmall(RuleError):
    """The probe graph cannot host the regions the checks need."""


class EvolutionError(RuntimeError):
    """An evolved operator did not localize as the rule promises."""


class SizeLimitError(RuntimeError):
    """A dense operator would exceed the configured size limits."""


# ---------------------------------------------------------------------------
# blocks and rules


@dataclass(frozen=True, eq=False)
class Block:
    sites: tuple
    matrix: np.ndarray
    system: SiteSystem

    @property
    def layer0(self):
        return tuple(v for v, layer in self.sites if layer == 0)

    def in_order(self, sites):
        """Same operator with its sites listed in another order."""
        return Block(tuple(sites), self.system.space(sites).embed(self.matrix, self.sites), self.system)


def swap_block(system: SiteSystem, k: int, target: int):
    """Swap of layer-0 position ``target`` with the home site (last position)."""
    sp = system.space(range(k + 1))
    if system.kind == "direct_sum":
        m = np.eye(system.d)
        swap = np.block([[np.zeros_like(m), m], [m, np.zeros_like(m)]])
    else:
        d = system.d
        swap = np.zeros((d * d, d * d))
        for x, y in itertools.product(range(d), repeat=2):
            swap[y * d + x, x * d + y] = 1.0
    return sp.embed(swap.astype(system.dtype), (target, k))


def dressed_swap_block(system: SiteSystem, k: int, target: int, dressing):
    """(G (x) I) S (G^-1 (x) I) with G acting on the k layer-0 positions."""
    S = swap_block(system, k, target)
    sp = system.space(range(k + 1))
    G = sp.embed(np.asarray(dressing, dtype=system.dtype), tuple(range(k)))
    return G @ S @ np.linalg.inv(G)


def linear_block(coefficients, modes):
    """Block of a linear one-particle rule from its coefficient matrices T_h.

    With u the column block of stacked T_h, the conjugated swap reads
    [[I - u u^dag, u], [u^dag, 0]] on (N+_e, 0) (+) (e, 1).
    """
    u = np.vstack([np.asarray(T, dtype=complex) for T in coefficients])
    if u.shape[1] != modes or any(np.shape(T) != (modes, modes) for T in coefficients):
        raise RuleError(f"coefficient matrices must all be {modes}x{modes}")
    k = u.shape[0]
    return np.block([[np.eye(k) - u @ u.conj().T, u], [u.conj().T, np.zeros((modes, modes))]])


@dataclass(frozen=True, eq=False)
class LocalRule:
    """Offsets h in N+_e and the block S'_e on (N+_e, 0) + (e, 1)."""

    offsets: tuple
    system: SiteSystem
    block: np.ndarray
    decomposability_bound: int = 4
    name: str = ""
    coefficients: tuple | None = None  # linear fermionic rules: T_h per offset

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(str(o) for o in self.offsets))
        block = np.asarray(self.block, dtype=self.system.dtype)
        object.__setattr__(self, "block", block)
        dim = self.system.dim(len(self.offsets) + 1)
        if block.shape != (dim, dim):
            raise RuleError(
                f"block shape {block.shape} does not match {len(self.offsets)} offsets plus home site ({dim})"
            )

    @property
    def k(self):
        return len(self.offsets)

    def scheme(self, graph: CayleyGraph) -> NeighborhoodScheme:
        return NeighborhoodScheme(graph, self.offsets)

    def instantiate(self, graph: CayleyGraph, g, scheme=None) -> Block:
        scheme = scheme or self.scheme(graph)
        try:
            targets = scheme.plus(g)
        except ClippingError as exc:
            raise ProbeTooSmall(str(exc)) from None
        if len(set(targets)) != len(targets):
            raise ProbeTooSmall(
                f"offsets {list(self.offsets)} collide at {g!r} on this graph; use a larger graph"
            )
        sites = tuple((x, 0) for x in targets) + ((g, 1),)
        return Block(sites, self.block, self.system)

    def max_offset_length(self, graph):
        return self.scheme(graph).max_offset_length

    def perturbed(self, eps, index=(0, 0)):
        b = self.block.copy()
        b[index] += eps
        return LocalRule(self.offsets, self.system, b, self.decomposability_bound, self.name + "+perturbed")


# ---------------------------------------------------------------------------
# conjugation by blocks


def _conjugate(x: RegionTransformation, block: Block, tol) -> RegionTransformation:
    """S' X S' followed by reduction to the minimal support."""
    sites = x.region + tuple(s for s in block.sites if s not in x.region)
    sp = x.system.space(sites)
    if sp.dim > MAX_LOCAL_DIM:
        raise SizeLimitError(f"conjugation on {len(sites)} sites exceeds dimension {MAX_LOCAL_DIM}")
    U = sp.embed(block.matrix, block.sites)
    ops = [U @ o @ U for o in x.embedded(sites)]
    hit = set()
    for o in ops:
        hit.update(sp.support(o, tol))
    keep = tuple(s for s in sites if s in hit)
    return RegionTransformation(keep, tuple(sp.reduce(o, keep) for o in ops), x.system, x.weights)


def conjugate_by_blocks(x: RegionTransformation, blocks, tol=None):
    tol = tolerances().support if tol is None else tol
    for b in blocks:
        x = _conjugate(x, b, tol)
    return x


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    rule: str
    backend: str
    base: object
    involution_residual: float = 0.0
    commutation: list = field(default_factory=list)  # (f, residual)
    mixed: list = field(default_factory=list)  # dicts per case
    tolerance: float = 0.0
    note: str = (
        "external systems restricted to none or one ancilla site of the same type"
    )

    @property
    def involutive(self):
        return self.involution_residual <= self.tolerance

    @property
    def commutation_failures(self):
        return [(f, r) for f, r in self.commutation if r > self.tolerance]

    @property
    def mixed_failures(self):
        return [c for c in self.mixed if not c["passed"]]

    @property
    def passed(self):
        return self.involutive and not self.commutation_failures and not self.mixed_failures

    def to_json(self, graph):
        site = graph.site_to_json
        return {
            "rule": self.rule,
            "backend": self.backend,
            "base_site": site(self.base),
            "passed": self.passed,
            "involution": {"passed": self.involutive, "residual": self.involution_residual},
            "commutation": {
                "passed": not self.commutation_failures,
                "checked": len(self.commutation),
                "failures": [
                    {"pair": [site(self.base), site(f)], "residual": r}
                    for f, r in self.commutation_failures
                ],
            },
            "mixed_evolution": [
                {**{k: v for k, v in c.items() if k not in ("R", "S", "outside")},
                 "R": [site(x) for x in c["R"]], "S": [site(x) for x in c["S"]],
                 "outside": [[site(v), l] for v, l in c["outside"]]}
                for c in self.mixed
            ],
            "tolerance": self.tolerance,
            "note": self.note,
        }


def _mixed_cases(rule: LocalRule, graph, scheme, e):
    cases = [((e,), ()), ((), (e,))]
    if rule.system.backend == "fermionic":
        radius = 2 * max(scheme.max_offset_length, 1)
        ball = [f for f, d in sorted(graph.distances_from(e).items(), key=lambda t: graph.index(t[0])) if d <= radius]
        for f in ball:
            if f != e:
                cases.append(((e, f), ()))
        for f in ball:
            cases.append(((e,), (f,)))
        for f in ball:
            if f != e:
                cases.append(((), (e, f)))
    return cases


def validate_rule(rule: LocalRule, graph: CayleyGraph, base=None, tol=None) -> ValidationReport:
    """Involution, commutation of overlapping blocks and localization of mixed
    layer evolutions, all checked around ``base`` (default: the identity)."""
    tols = tolerances()
    tol = tols.equality if tol is None else tol
    scheme = rule.scheme(graph)
    e = graph.identity if base is None else base
    report = ValidationReport(rule.name, rule.system.backend, e, tolerance=tol)
    blocks = {}

    def block(g):
        if g not in blocks:
            blocks[g] = rule.instantiate(graph, g, scheme)
        return blocks[g]

    B = block(e)
    report.involution_residual = max_abs(B.matrix @ B.matrix - np.eye(B.matrix.shape[0]))

    # (ii) commutation with every block sharing a layer-0 site
    try:
        partners = set()
        for x in scheme.plus(e):
            partners.update(scheme.minus(x))
    except ClippingError as exc:
        raise ProbeTooSmall(str(exc)) from None
    for f in graph.sort_sites(partners - {e}):
        Bf = block(f)
        sites = B.sites + tuple(s for s in Bf.sites if s not in B.sites)
        sp = rule.system.space(sites)
        if sp.dim > MAX_LOCAL_DIM:
            raise SizeLimitError("commutation check exceeds the local size limit")
        X, Y = sp.embed(B.matrix, B.sites), sp.embed(Bf.matrix, Bf.sites)
        report.commutation.append((f, max_abs(X @ Y - Y @ X)))

    # (iii) mixed evolution: C on (R,0)+(S,1), conjugated by S'_{N-_R u S},
    # must live on (N+_S,0)+(N-_R,1)
    for R, S in _mixed_cases(rule, graph, scheme, e):
        try:
            nminus_R = scheme.neighborhood(R, "-")
            nplus_S = scheme.neighborhood(S, "+")
            conj_sites = graph.sort_sites(set(nminus_R) | set(S))
            conj_blocks = [block(h) for h in conj_sites]
        except ClippingError as exc:
            raise ProbeTooSmall(str(exc)) from None
        sites_in = tuple((r, 0) for r in R) + tuple((s, 1) for s in S)
        if len(sites_in) == 1:
            sites_in = sites_in + (ANCILLA,)
        allowed = {(x, 0) for x in nplus_S} | {(x, 1) for x in nminus_R} | {ANCILLA}
        outside = set()
        for name, op in operator_basis(rule.system, sites_in):
            C = RegionTransformation(sites_in, (op,), rule.system)
            out = conjugate_by_blocks(C, conj_blocks, tols.support)
            outside.update(set(out.region) - allowed)
        report.mixed.append({
            "case": f"|R|={len(R)},|S|={len(S)}",
            "R": list(R),
            "S": list(S),
            "passed": not outside,
            "outside": sorted(outside, key=lambda s: (graph.index(s[0]), s[1])),
            "basis_size": len(operator_basis(rule.system, sites_in)),
        })
    return report


# ---------------------------------------------------------------------------
# wrapped automata


@dataclass(eq=False)
class WrappedAutomaton:
    graph: CayleyGraph
    system: SiteSystem
    blocks: dict = field(default_factory=dict)
    rule: LocalRule | None = None
    V: np.ndarray | None = None
    name: str = ""
    order: tuple | None = None

    def __post_init__(self):
        self._scheme = self.rule.scheme(self.graph) if self.rule is not None else None
        if self.order is None and self.graph.finite:
            self.order = self.graph.vertices

    @property
    def vertices(self):
        return self.graph.vertices

    @property
    def scheme(self):
        return self._scheme

    def block(self, g) -> Block:
        if g not in self.blocks:
            if self.rule is None:
                raise KeyError(f"no block at {g!r}")
            self.blocks[g] = self.rule.instantiate(self.graph, g, self._scheme)
        return self.blocks[g]

    def all_blocks(self):
        return [self.block(g) for g in self.order]

    def plus(self, region):
        if self._scheme is not None:
            try:
                return self._scheme.neighborhood(region, "+")
            except ClippingError as exc:
                raise EvolutionError(str(exc)) from None
        out = set()
        for g in region:
            out.update(self.block(g).layer0)
        return frozenset(out)

    def minus(self, region):
        if self._scheme is not None:
            try:
                return self._scheme.neighborhood(region, "-")
            except ClippingError as exc:
                raise EvolutionError(str(exc)) from None
        region = set(region)
        return frozenset(g for g in self.vertices if region & set(self.block(g).layer0))

    @property
    def global_dim(self):
        return self.system.dim(len(self.vertices))

    def inverse(self):
        if self.V is None:
            raise SizeLimitError("the inverse automaton needs the global evolution")
        return from_global(self.V.conj().T, self.graph, self.system, name=f"{self.name}^-1")

    def describe(self):
        return {
            "name": self.name,
            "backend": self.system.describe(),
            "num_sites": len(self.vertices),
            "global_dim": self.global_dim,
            "has_global": self.V is not None,
            "rule": self.rule.name if self.rule is not None else None,
        }


def _doubled_positions(graph, sites):
    n = len(graph.vertices)
    return [layer * n + graph.index(v) for v, layer in sites]


def _canonical_phase(V):
    col = V[:, 0]
    i = int(np.argmax(np.abs(col) > np.abs(col).max() * (1 - 1e-9)))
    ph = col[i] / abs(col[i])
    return V / ph


def extract_global(auto: WrappedAutomaton, eta=0):
    """Recover V from the blocks by running W on |eta> (x) |x> for every x.

    Returns None when the doubled lattice is too large.  For the qubit backend
    V is determined up to a global phase, which is fixed by making the largest
    entry of the first column real and positive.
    """
    n = len(auto.vertices)
    sys_ = auto.system
    blocks = auto.all_blocks()
    if sys_.kind == "direct_sum":
        m = sys_.d
        N = n * m
        if 2 * N > MAX_GLOBAL_DIM:
            return None
        W = doubled_evolution(auto)
        return W[:N, :N].copy()
    D = sys_.d
    dim = D**n
    if dim > MAX_GLOBAL_DIM or dim * dim > MAX_SWEEP_DIM:
        return None
    V = np.zeros((dim, dim), dtype=sys_.dtype)
    chunk = max(1, MAX_SWEEP_DIM // (4 * dim * dim))
    ref = None
    for start in range(0, dim, chunk):
        xs = np.arange(start, min(dim, start + chunk))
        psi = np.zeros((len(xs), dim * dim), dtype=sys_.dtype)
        # layer swap first: the inputs already sit on layer 1, eta on layer 0
        psi[np.arange(len(xs)), eta * dim + xs] = 1.0
        for b in blocks:
            psi = apply_gate(psi, b.matrix, _doubled_positions(auto.graph, b.sites), 2 * n, D)
        M = psi.reshape(len(xs), dim, dim)
        if sys_.backend == "classical":
            V[:, xs] = M.sum(axis=2).T
            resid = max_abs(M - M.sum(axis=2)[:, :, None] * M.sum(axis=1)[:, None, :])
        else:
            if ref is None:
                _, _, vh = np.linalg.svd(M[0])
                ref = vh[0]
            a = M @ ref.conj()
            V[:, xs] = a.T
            resid = max_abs(M - a[:, :, None] * ref[None, None, :])
        if resid > tolerances().equality:
            raise EvolutionError(
                f"doubled evolution is not of product form (residual {resid:.3g}); blocks do not define V (x) V^-1"
            )
    if sys_.backend == "qubit":
        V = _canonical_phase(V)
    return V


def layer_swap(auto: WrappedAutomaton):
    n = len(auto.vertices)
    sites = [(v, 0) for v in auto.vertices] + [(v, 1) for v in auto.vertices]
    sp = auto.system.space(sites)
    return sp.permutation({(v, l): (v, 1 - l) for v, l in sites})


def doubled_evolution(auto: WrappedAutomaton):
    """Dense W = (prod_g S'_g) S on the doubled lattice (small graphs only)."""
    sites = [(v, 0) for v in auto.vertices] + [(v, 1) for v in auto.vertices]
    sp = auto.system.space(sites)
    if sp.dim > MAX_GLOBAL_DIM:
        raise SizeLimitError(f"doubled lattice dimension {sp.dim} exceeds {MAX_GLOBAL_DIM}")
    W = layer_swap(auto).astype(auto.system.dtype)
    for b in auto.all_blocks():
        W = sp.embed(b.matrix, b.sites) @ W
    return W


def assemble(rule: LocalRule, graph: CayleyGraph, validate=True, order=None, eta=0, tol=None) -> WrappedAutomaton:
    if not graph.finite:
        raise RuleError("assembly needs a finite graph; use a windowed automaton for block-local work")
    if validate:
        report = validate_rule(rule, graph, tol=tol)
        if not report.passed:
            raise RuleError(f"rule {rule.name!r} failed validation on this graph")
    auto = WrappedAutomaton(graph, rule.system, {}, rule, None, rule.name, tuple(order) if order else None)
    for g in graph.vertices:
        auto.block(g)
    auto.V = extract_global(auto, eta)
    return auto


def windowed(rule: LocalRule, graph: CayleyGraph) -> WrappedAutomaton:
    """Automaton on a window: blocks are instantiated lazily, no global V."""
    return WrappedAutomaton(graph, rule.system, {}, rule, None, rule.name, ())


def assembly_checks(auto: WrappedAutomaton):
    """Consistency numbers for an assembled automaton."""
    out = {}
    V = auto.V
    if V is None:
        return {"global": None}
    I = np.eye(V.shape[0])
    if auto.system.backend == "classical":
        out["stochastic_residual"] = max_abs(V.sum(axis=0) - 1)
        out["permutation"] = bool(np.all((V == 0) | (V == 1)))
    out["unitarity_residual"] = max_abs(V.conj().T @ V - I)
    n = len(auto.vertices)
    if auto.system.dim(2 * n) <= MAX_GLOBAL_DIM:
        W = doubled_evolution(auto)
        S = layer_swap(auto)
        if auto.system.kind == "direct_sum":
            target = np.block([[V, np.zeros_like(V)], [np.zeros_like(V), V.conj().T]])
        else:
            target = np.kron(V, V.conj().T)
        out["W_vs_V_tensor_Vinv"] = max_abs(W - target)
        out["W_inverse_vs_SWS"] = max_abs(np.linalg.inv(W) - S @ W @ S)
    return out


# ---------------------------------------------------------------------------
# evolution


@dataclass(frozen=True, eq=False)
class EvolvedTransformation:
    payload: RegionTransformation
    direction: str
    steps: int


def _split_region(auto, region):
    inside = [s for s in region if s in auto.graph]
    return inside, [s for s in region if s not in auto.graph]


def _one_step(auto, F: RegionTransformation, forward: bool, tol, strict=True):
    R, _ = _split_region(auto, F.region)
    start_layer, end_layer = (1, 0) if forward else (0, 1)
    relabel = {s: ((s, start_layer) if s in auto.graph else s) for s in F.region}
    X = F.map_sites(relabel)
    hosts = R if forward else auto.minus(R)
    blocks = [auto.block(h) for h in auto.graph.sort_sites(hosts)]
    X = conjugate_by_blocks(X, blocks, tol)
    back, leftover = {}, []
    for s in X.region:
        if isinstance(s, tuple) and len(s) == 2 and s[0] in auto.graph and s != ANCILLA and s[1] in (0, 1):
            if s[1] != end_layer:
                if strict:
                    raise EvolutionError(
                        f"evolved operator still acts on layer {s[1]} at {s[0]!r}; the blocks are not a valid local rule"
                    )
                leftover.append(s)
                continue
            back[s] = s[0]
        else:
            back[s] = s
    if leftover:
        # lenient mode: trace out what is left on the start layer
        keep = tuple(s for s in X.region if s not in leftover)
        sp = X.system.space(X.region)
        X = RegionTransformation(keep, tuple(sp.reduce(o, keep) for o in X.ops), X.system, X.weights)
    order = sorted(X.region, key=lambda s: (0, auto.graph.index(back[s])) if back[s] in auto.graph else (1, 0))
    X = _reorder(X, order)
    return X.map_sites(back)


def _reorder(x: RegionTransformation, sites):
    sites = tuple(sites)
    if sites == x.region:
        return x
    sp = x.system.space(sites)
    return RegionTransformation(sites, tuple(sp.embed(o, x.region) for o in x.ops), x.system, x.weights)


def evolve_transformation(auto: WrappedAutomaton, F: RegionTransformation, direction="forward", steps=1, tol=None,
                          strict=True):
    """V^t F V^-t (forward) or V^-t F V^t (backward) using only blocks.

    With ``strict=False`` support left behind on the start layer (which only
    happens for blocks that are not a valid rule) is traced out instead of
    raising, so a corrupted rule still yields a comparable result.
    """
    tol = tolerances().support if tol is None else tol
    forward = direction in ("forward", "fwd", "+")
    X = F
    for _ in range(steps):
        X = _one_step(auto, X, forward, tol, strict)
    return EvolvedTransformation(X, "forward" if forward else "backward", steps)


def global_operator(auto: WrappedAutomaton, extra_sites=()):
    """V (x) I on the vertices plus external sites."""
    if auto.V is None:
        raise SizeLimitError("global evolution not materialized for this automaton")
    sites = tuple(auto.vertices) + tuple(extra_sites)
    sp = auto.system.space(sites)
    if sp.dim > 2 * MAX_GLOBAL_DIM:
        raise SizeLimitError(f"dimension {sp.dim} too large for direct conjugation")
    return sp, sp.embed(auto.V, auto.vertices)


def conjugate_directly(auto: WrappedAutomaton, F: RegionTransformation, direction="forward", tol=None):
    """Oracle path: conjugate by the dense global evolution and reduce."""
    tol = tolerances().support if tol is None else tol
    _, external = _split_region(auto, F.region)
    sp, U = global_operator(auto, external)
    Ui = U.conj().T
    if direction not in ("forward", "fwd", "+"):
        U, Ui = Ui, U
    ops = [U @ o @ Ui for o in F.embedded(sp.sites)]
    hit = set()
    for o in ops:
        hit.update(sp.support(o, tol))
    keep = tuple(s for s in sp.sites if s in hit)
    return RegionTransformation(keep, tuple(sp.reduce(o, keep) for o in ops), F.system, F.weights)


def evolve_state(auto: WrappedAutomaton, state, steps=1):
    """Apply the global evolution ``steps`` times to a state on all sites."""
    from .backend import RegionState

    if steps == 0:
        return state
    if auto.V is None:
        raise SizeLimitError("global evolution not materialized for this automaton")
    if tuple(state.region) != tuple(auto.vertices):
        raise ValueError("state must be given on all sites in graph order")
    V = auto.V
    x = state.payload
    for _ in range(steps):
        if auto.system.backend == "qubit" and x.ndim == 2:
            x = V @ x @ V.conj().T
        else:
            x = V @ x
    return RegionState(state.region, x, state.system)


# ---------------------------------------------------------------------------
# extraction from an explicit global rule


@dataclass
class ExtractionReport:
    blocks: dict
    local: dict  # vertex -> bool (None when no scheme given)
    scheme_offsets: tuple | None

    @property
    def reducible(self):
        if any(v is None for v in self.local.values()):
            return None
        return all(self.local.values())

    def to_json(self, graph):
        site = graph.site_to_json
        return {
            "scheme_offsets": list(self.scheme_offsets) if self.scheme_offsets else None,
            "reducible": self.reducible,
            "blocks": [
                {
                    "site": site(g),
                    "support": [[site(v), l] for v, l in b.sites],
                    "local": self.local[g],
                }
                for g, b in self.blocks.items()
            ],
        }


def _inverse_of(V, tol):
    if max_abs(V.conj().T @ V - np.eye(V.shape[0])) <= tol:
        return V.conj().T
    try:
        return np.linalg.inv(V)
    except np.linalg.LinAlgError:
        raise RuleError("global rule is not invertible") from None


def extract_blocks(V, graph: CayleyGraph, system: SiteSystem, scheme: NeighborhoodScheme | None = None, tol=None):
    """Blocks S'_g = (V (x) I) S_g (V^-1 (x) I) reduced to their minimal support."""
    tol = tolerances().support if tol is None else tol
    if not graph.finite:
        raise RuleError("block extraction needs a finite graph")
    V = np.asarray(V)
    verts = graph.vertices
    if V.shape != (system.dim(len(verts)),) * 2:
        raise RuleError(f"global rule has shape {V.shape}, expected dimension {system.dim(len(verts))}")
    if system.backend == "classical" and (np.abs(V.sum(axis=0) - 1).max() > tol or V.min() < -tol):
        raise RuleError("classical global rule must be stochastic")
    Vi = _inverse_of(V, tol)
    if system.backend == "classical" and not np.all(np.isclose(Vi, np.round(Vi)) & (np.round(Vi) >= 0)):
        raise RuleError("classical global rule is not a reversible permutation of configurations")
    blocks, local = {}, {}
    if system.kind == "direct_sum":
        m = system.d
        n = len(verts)
        sites = [(v, 0) for v in verts] + [(v, 1) for v in verts]
        sp = system.space(sites)
        U = np.zeros((2 * n * m, 2 * n * m), dtype=complex)
        U[: n * m, : n * m] = V
        U[n * m:, n * m:] = np.eye(n * m)
        Ui = np.zeros_like(U)
        Ui[: n * m, : n * m] = Vi
        Ui[n * m:, n * m:] = np.eye(n * m)
        for g in verts:
            S = sp.permutation({s: s for s in sites} | {(g, 0): (g, 1), (g, 1): (g, 0)})
            Sp = U @ S @ Ui
            supp = set(sp.support(Sp, tol)) | {(g, 1)}
            keep = tuple(s for s in sites if s in supp and s[1] == 0) + ((g, 1),)
            blocks[g] = Block(keep, sp.reduce(Sp, keep), system)
    else:
        D = system.d
        sp0 = system.space(verts)
        for g in verts:
            terms = {}
            hit = set()
            for i, j in itertools.product(range(D), repeat=2):
                O = V @ sp0.embed(unit(D, i, j), (g,)) @ Vi
                terms[i, j] = O
                hit.update(sp0.support(O, tol))
            X = tuple(v for v in verts if v in hit)
            mat = sum(np.kron(sp0.reduce(terms[i, j], X), unit(D, j, i)) for i, j in terms)
            blocks[g] = Block(tuple((v, 0) for v in X) + ((g, 1),), mat.astype(system.dtype), system)
    for g in verts:
        if scheme is None:
            local[g] = None
        else:
            local[g] = set(blocks[g].layer0) <= set(scheme.plus(g))
    return ExtractionReport(blocks, local, tuple(map(str, scheme.plus_offsets)) if scheme else None)


def from_global(V, graph: CayleyGraph, system: SiteSystem, name="", scheme=None, tol=None):
    report = extract_blocks(V, graph, system, scheme, tol)
    auto = WrappedAutomaton(graph, system, dict(report.blocks), None, np.asarray(V), name)
    return auto


def from_blocks(blocks: dict, graph: CayleyGraph, system: SiteSystem, name="", order=None, eta=0):
    auto = WrappedAutomaton(graph, system, dict(blocks), None, None, name, tuple(order) if order else None)
    auto.V = extract_global(auto, eta)
    return auto


def aligned_residual(A, B):
    """max|A - c B| with the global phase c fixed on the largest entry of B."""
    i = np.argmax(np.abs(B))
    c = 1.0
    if abs(B.flat[i]) > 0 and np.iscomplexobj(A):
        c = A.flat[i] / B.flat[i]
        c = c / abs(c)
    return max_abs(A - c * B)


# ---------------------------------------------------------------------------
# translation invariance


@dataclass
class TranslationReport:
    passed: bool
    residual: float
    per_generator: dict
    offending_sites: list
    method: str

    def to_json(self, graph):
        return {
            "passed": self.passed,
            "residual": self.residual,
            "per_generator": self.per_generator,
            "offending_sites": [graph.site_to_json(g) for g in self.offending_sites],
            "method": self.method,
        }


def _block_at_identity(auto, g):
    """Block of g translated back to the identity, sites in canonical order."""
    graph = auto.graph
    m = graph.model
    ginv = m.invert(g)
    b = auto.block(g)
    mapped = tuple((m.multiply(ginv, v), l) for v, l in b.sites)
    canon = tuple(sorted(mapped, key=lambda s: (s[1], graph.index(s[0]))))
    return Block(mapped, b.matrix, b.system).in_order(canon)


def _block_classes(auto, tol):
    classes = []  # [representative, members]
    for g in auto.vertices:
        b = _block_at_identity(auto, g)
        for cls in classes:
            rep = cls[0]
            if rep.sites == b.sites and max_abs(rep.matrix - b.matrix) <= tol:
                cls[1].append(g)
                break
        else:
            classes.append([b, [g]])
    return classes


def check_translation_invariance(auto: WrappedAutomaton, tol=None) -> TranslationReport:
    tol = tolerances().invariance if tol is None else tol
    graph = auto.graph
    if not graph.finite:
        raise RuleError("translation invariance needs a finite group; windows have no global translations")
    m = graph.model
    per = {}
    if auto.V is not None:
        sp = auto.system.space(auto.vertices)
        for h in graph.presentation.generators:
            x = m.generator(h)
            T = sp.permutation({g: m.multiply(x, g) for g in auto.vertices})
            per[h] = max_abs(T.T @ auto.V @ T - auto.V)
        method = "global"
    else:
        for h in graph.presentation.generators:
            x = m.generator(h)
            worst = 0.0
            for g in auto.vertices:
                b = auto.block(g)
                moved = tuple((m.multiply(x, v), l) for v, l in b.sites)
                tb = auto.block(m.multiply(x, g))
                if set(moved) != set(tb.sites):
                    worst = np.inf
                    break
                worst = max(worst, max_abs(Block(moved, b.matrix, b.system).in_order(tb.sites).matrix - tb.matrix))
            per[h] = worst
        method = "blocks"
    residual = max(per.values(), default=0.0)
    passed = residual < tol
    offending = []
    if not passed:
        classes = _block_classes(auto, tolerances().equality)
        e = graph.identity
        classes.sort(key=lambda c: (-len(c[1]), e not in c[1]))
        for _, members in classes[1:]:
            offending.extend(members)
        offending = graph.sort_sites(offending)
    return TranslationReport(passed, float(residual), per, offending, method)
