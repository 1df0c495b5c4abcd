"""Causal influence, neighborhoods and signalling of a global rule.

Causal influence g -> g' is detected by conjugating a fixed spanning list of
local transformations at g (plus couplings to one ancilla site) with the
evolution and reading off the minimal support.  Signalling is detected on
states: the input at g is varied over a list of states with every other site
held in a reference state, and a site counts when its one-step marginal moves.

Spanning lists, per backend:

classical  id, flip/add_k, reset_v, keep_v (and matrix units for d > 2); with
           the ancilla, copy site->ancilla and ancilla-controlled add.  These
           span all d x d matrices, so any transformation at g is a linear
           combination and its conjugate is supported in the union of supports.
qubit      conjugation by X, Y, Z and CNOT(site -> ancilla).  V P V^dag for the
           Paulis generates the image of the one-site algebra.
fermionic  I + E_ab over the site's modes and hopping to one ancilla mode.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .automaton import (
    ANCILLA,
    SizeLimitError,
    WrappedAutomaton,
    conjugate_directly,
    evolve_transformation,
)
from .backend import RegionTransformation, operator_basis, spanning_set
from .constants import tolerances
from .siteops import max_abs

ANCILLA_NOTE = "external systems: none or a single ancilla site of the same type"


def _conjugate(auto, F, direction):
    if auto.V is not None:
        return conjugate_directly(auto, F, direction)
    return evolve_transformation(auto, F, direction).payload


def _touched(auto, F, direction):
    out = _conjugate(auto, F, direction)
    return [s for s in out.region if s in auto.graph]


def forward_set(auto: WrappedAutomaton, g):
    """(sites, witnesses) for N+_g by conjugating the spanning list at g."""
    witnesses = {}
    for name, F in spanning_set(auto.system, g, ANCILLA):
        for s in _touched(auto, F, "forward"):
            witnesses.setdefault(s, name)
    return auto.graph.sort_sites(witnesses), witnesses


def backward_set(auto: WrappedAutomaton, g):
    """Support of V^-1 F V over the spanning list (used for the duality check)."""
    hit = set()
    for _, F in spanning_set(auto.system, g, ANCILLA):
        hit.update(_touched(auto, F, "backward"))
    return auto.graph.sort_sites(hit)


def _all_forward(auto, jobs=1):
    cache = getattr(auto, "_forward_cache", None)
    if cache is None:
        verts = list(auto.vertices)
        if jobs and jobs > 1:
            with ThreadPoolExecutor(jobs) as pool:
                results = list(pool.map(lambda g: forward_set(auto, g), verts))
        else:
            results = [forward_set(auto, g) for g in verts]
        cache = dict(zip(verts, results))
        auto._forward_cache = cache
    return cache


def causal_neighborhood(auto: WrappedAutomaton, g, direction="+", jobs=1):
    """N+_g (sites g influences) or N-_g = {g' : g in N+_g'}, with witnesses."""
    if direction in ("+", "fwd", "forward"):
        cache = getattr(auto, "_forward_cache", None)
        if cache is not None:
            return cache[g]
        return forward_set(auto, g)
    sets = _all_forward(auto, jobs)
    witnesses = {h: sets[h][1][g] for h in auto.vertices if g in sets[h][1]}
    return auto.graph.sort_sites(witnesses), witnesses


def causal_neighborhood_region(auto: WrappedAutomaton, region):
    """N+_R from a full operator basis on R."""
    region = tuple(auto.graph.sort_sites(region))
    hit = set()
    for _, op in operator_basis(auto.system, region):
        F = RegionTransformation(region, (op.astype(auto.system.dtype),), auto.system)
        hit.update(_touched(auto, F, "forward"))
    return auto.graph.sort_sites(hit)


def influence_graph(auto: WrappedAutomaton, jobs=1):
    sets = _all_forward(auto, jobs)
    return [(g, h) for g in auto.vertices for h in sets[g][0]]


# ---------------------------------------------------------------------------
# signalling


def _site_states(system):
    d = system.d
    if system.backend == "classical":
        return [np.eye(d)[v] for v in range(d)]
    if system.backend == "qubit":
        s = 1 / np.sqrt(2)
        return [np.array([1, 0], complex), np.array([0, 1], complex),
                np.array([s, s], complex), np.array([s, 1j * s], complex)]
    out = [np.eye(d, dtype=complex)[a] for a in range(d)]
    for a, b in itertools.combinations(range(d), 2):
        for ph in (1, 1j):
            v = np.zeros(d, complex)
            v[a], v[b] = 1 / np.sqrt(2), ph / np.sqrt(2)
            out.append(v)
    return out


def _reference_states(system):
    d = system.d
    if system.backend == "classical":
        return {"all-0": np.eye(d)[0], "all-max": np.eye(d)[d - 1]}
    s = 1 / np.sqrt(2)
    return {"all-0": np.array([1, 0], complex), "all-plus": np.array([s, s], complex)}


def _marginals(auto, out):
    """Per-site output marginal: distribution, reduced density matrix or mode block."""
    n, sys_ = len(auto.vertices), auto.system
    d = sys_.d
    res = []
    if sys_.backend == "classical":
        T = out.reshape((d,) * n)
        for i in range(n):
            res.append(T.sum(axis=tuple(j for j in range(n) if j != i)))
    elif sys_.backend == "qubit":
        T = out.reshape((d,) * n)
        for i in range(n):
            M = np.moveaxis(T, i, 0).reshape(d, -1)
            res.append(M @ M.conj().T)
    else:
        for i in range(n):
            v = out[i * d:(i + 1) * d]
            res.append(np.outer(v, v.conj()))
    return res


def signalling_neighborhood(auto: WrappedAutomaton, g, tol=None):
    """Sites whose one-step marginal depends on the input at g."""
    tol = tolerances().signal if tol is None else tol
    if auto.V is None:
        raise SizeLimitError("signalling analysis needs the global evolution")
    sys_ = auto.system
    verts = auto.vertices
    gi = auto.graph.index(g)
    hit = set()
    if sys_.kind == "direct_sum":
        d = sys_.d
        outs = []
        for v in _site_states(sys_):
            psi = np.zeros(len(verts) * d, complex)
            psi[gi * d:(gi + 1) * d] = v
            outs.append(_marginals(auto, auto.V @ psi))
        for a, b in itertools.combinations(outs, 2):
            hit.update(verts[i] for i in range(len(verts)) if max_abs(a[i] - b[i]) > tol)
        return auto.graph.sort_sites(hit)
    for ref in _reference_states(sys_).values():
        outs = []
        for v in _site_states(sys_):
            psi = np.ones(1)
            for i in range(len(verts)):
                psi = np.kron(psi, v if i == gi else ref)
            outs.append(_marginals(auto, auto.V @ psi))
        for a, b in itertools.combinations(outs, 2):
            hit.update(verts[i] for i in range(len(verts)) if max_abs(a[i] - b[i]) > tol)
    return auto.graph.sort_sites(hit)


# ---------------------------------------------------------------------------
# cooperative influence (one-particle sector only)


def cooperative_scan(auto: WrappedAutomaton, g, partners=None):
    """Sites reached by joint transformations on {g, f} beyond N+_g u N+_f."""
    if auto.system.backend != "fermionic":
        raise ValueError("cooperative influence is only scanned for the fermionic backend")
    partners = [f for f in (partners or auto.vertices) if f != g]
    ng = set(causal_neighborhood(auto, g)[0])
    out = {}
    for f in partners:
        joint = set(causal_neighborhood_region(auto, (g, f)))
        extra = joint - ng - set(causal_neighborhood(auto, f)[0])
        out[f] = auto.graph.sort_sites(extra)
    return out


# ---------------------------------------------------------------------------
# report


@dataclass
class InfluenceReport:
    site: object
    causal_forward: list
    causal_backward: list
    signalling_forward: list | None
    witnesses: dict = field(default_factory=dict)
    spanning_set_size: int = 0
    method: str = "global"
    note: str = ANCILLA_NOTE

    def to_json(self, auto: WrappedAutomaton):
        from .io import operator_to_json

        site = auto.graph.site_to_json
        spans = dict(spanning_set(auto.system, self.site, ANCILLA))
        return {
            "site": site(self.site),
            "causal_forward": [site(x) for x in self.causal_forward],
            "causal_backward": [site(x) for x in self.causal_backward],
            "signalling_forward": None if self.signalling_forward is None else [site(x) for x in self.signalling_forward],
            "witnesses": [
                {
                    "site": site(x),
                    "transformation": name,
                    "region": [site(s) if s in auto.graph else list(s) for s in spans[name].region],
                    "operator": operator_to_json(spans[name].matrix, auto.system),
                }
                for x, name in self.witnesses.items()
            ],
            "spanning_set": [name for name, _ in spanning_set(auto.system, self.site, ANCILLA)],
            "spanning_set_size": self.spanning_set_size,
            "method": self.method,
            "note": self.note,
        }


def influence_report(auto: WrappedAutomaton, g, jobs=1) -> InfluenceReport:
    fwd, wit = causal_neighborhood(auto, g, "+")
    bwd, _ = causal_neighborhood(auto, g, "-", jobs=jobs)
    sig = signalling_neighborhood(auto, g) if auto.V is not None else None
    return InfluenceReport(
        g, fwd, bwd, sig, {x: wit[x] for x in fwd},
        len(spanning_set(auto.system, g, ANCILLA)),
        "global" if auto.V is not None else "blocks",
    )
