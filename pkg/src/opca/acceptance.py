"""The bundled acceptance scenarios, shared by ``opca selftest`` and the tests.

Every criterion returns a Criterion whose ``checks`` list the individual
sub-checks with their observed values, so a failure says exactly what broke.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import gf2
from . import library as L
from .automaton import (
    ANCILLA,
    aligned_residual,
    check_translation_invariance,
    evolve_transformation,
    extract_blocks,
    from_blocks,
)
from .backend import (
    Classical,
    Qubit,
    RegionEffect,
    RegionTransformation,
    op_norm,
    spanning_set,
    sup_norm,
)
from .cayley import build_graph
from .group_engine import QuotientMap
from .influence import causal_neighborhood, signalling_neighborhood
from .quotient import check_level
from .siteops import max_abs
from .wrap import fermionic_unitarity, wrap_verify

DEFAULT_SEED = 20240601
XOR_SIZES = (4, 5, 7, 8)


@dataclass
class Criterion:
    number: int
    title: str
    checks: list = field(default_factory=list)  # (label, passed, detail)

    def check(self, label, passed, **detail):
        self.checks.append((label, bool(passed), detail))

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.checks)

    def failures(self):
        return [label for label, ok, _ in self.checks if not ok]

    def to_json(self):
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "checks": [{"label": lbl, "passed": ok, **d} for lbl, ok, d in self.checks],
        }

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = "" if self.passed else "  (failed: " + "; ".join(self.failures()) + ")"
        return f"[{status}] criterion {self.number}: {self.title}{extra}"


@functools.lru_cache(maxsize=None)
def bundled():
    return L.bundled_automata()


@functools.lru_cache(maxsize=None)
def perturbed():
    return L.site_perturbed_automaton()


def clear_caches():
    bundled.cache_clear()
    perturbed.cache_clear()


def _sites(graph, sites):
    return [graph.site_to_json(s) for s in sites]


# ---------------------------------------------------------------------------


def criterion_1(seed=DEFAULT_SEED):
    c = Criterion(1, "quotient classification of the two torus quotients of Z^2")
    expected = {(6, 5): "pedantic", (8, 7): "pedantic2"}
    for (m, n), level in expected.items():
        rep = check_level(QuotientMap(L.Z2(), L.torus(m, n)), "pedantic2")
        c.check(
            f"Z^2 -> Z{m}xZ{n} reaches exactly {level}",
            rep.level_reached == level,
            reached=rep.level_reached,
            witness=rep.violations[0]["reduced"] if rep.violations else None,
        )
    return c


def criterion_2(seed=DEFAULT_SEED):
    c = Criterion(2, "XOR rule: invertibility, signalling vs causal neighborhood")
    for r in (4, 5, 6, 7, 8):
        rank = gf2.rank(gf2.xor_rule(r))
        want = r != 6
        c.check(f"r={r} invertible is {want}", (rank == r) == want, gf2_rank=rank)
    for r in XOR_SIZES:
        auto = L.xor_automaton(r)
        g = auto.graph
        sig_ok, causal_ok = True, True
        sig0 = causal0 = None
        for x in g.vertices:
            nb = {g.mul(x, "a^-1"), x, g.mul(x, "a")}
            sig = signalling_neighborhood(auto, x)
            causal = causal_neighborhood(auto, x)[0]
            sig_ok &= set(sig) == nb
            causal_ok &= set(causal) == set(g.vertices)
            if x == g.identity:
                sig0, causal0 = sig, causal
        c.check(f"r={r} signalling = {{g-1, g, g+1}}", sig_ok, site_0=_sites(g, sig0))
        c.check(
            f"r={r} causal = all of Z{r}",
            causal_ok,
            site_0=_sites(g, causal0),
            size=len(causal0),
            expected_size=r,
        )
    return c


def criterion_3(seed=DEFAULT_SEED):
    c = Criterion(3, "block round trip for the shift and partial-swap automata on Z8")
    autos = bundled()
    for name in ("shift-qubit-Z8", "partial-swap-Z8"):
        auto = autos[name]
        g = auto.graph
        rep = extract_blocks(auto.V, g, auto.system)
        supports_ok = all(
            set(b.sites) == {(g.mul(x, "a"), 0), (x, 1)} for x, b in rep.blocks.items()
        )
        c.check(f"{name} blocks supported on (g a, 0) + (g, 1)", supports_ok)
        again = from_blocks(rep.blocks, g, auto.system)
        res = aligned_residual(again.V, auto.V)
        c.check(f"{name} reassembled V residual < 1e-10", res < 1e-10, residual=res)
    return c


def _lp_sup_norm(A):
    """inf lambda with D >= |A| entrywise and every column of D summing to lambda."""
    n_out, n_in = A.shape
    nD = n_out * n_in
    cost = np.zeros(nD + 1)
    cost[-1] = 1.0
    A_eq = np.zeros((n_in, nD + 1))
    for j in range(n_in):
        A_eq[j, [i * n_in + j for i in range(n_out)]] = 1.0
        A_eq[j, -1] = -1.0
    bounds = [(abs(a), None) for a in A.ravel()] + [(0, None)]
    res = linprog(cost, A_eq=A_eq, b_eq=np.zeros(n_in), bounds=bounds, method="highs")
    return float(res.fun)


def _vertex_op_norm(A):
    """sup over point-mass inputs of sup over effects a of (2a - e | A x)."""
    best = 0.0
    for j in range(A.shape[1]):
        col = A[:, j]
        for a in itertools.product((0, 1), repeat=len(col)):
            best = max(best, float((2 * np.array(a) - 1) @ col))
    return best


def criterion_4(seed=DEFAULT_SEED):
    c = Criterion(4, "classical norm suite: operational = sup norm, submultiplicativity, channels")
    rng = np.random.default_rng(seed)
    tol = 1e-9
    worst_eq, worst_lp, worst_vertex, worst_sub, worst_mixed, worst_chan = 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    samples = 0
    for _ in range(100):
        d = int(rng.integers(2, 9))
        a = RegionEffect(("x",), rng.uniform(-1, 1, d), Classical(d))
        worst_eq = max(worst_eq, abs(op_norm(a) - sup_norm(a)))
        samples += 1
    for _ in range(100):
        d = int(rng.integers(2, 9))
        s = Classical(d)
        A = RegionTransformation(("x",), (rng.uniform(-1, 1, (d, d)),), s)
        B = RegionTransformation(("x",), (rng.uniform(-1, 1, (d, d)),), s)
        AB = RegionTransformation(("x",), (A.matrix @ B.matrix,), s)
        worst_eq = max(worst_eq, abs(op_norm(A) - sup_norm(A)))
        worst_lp = max(worst_lp, abs(sup_norm(A) - _lp_sup_norm(A.matrix)))
        worst_vertex = max(worst_vertex, abs(op_norm(A) - _vertex_op_norm(A.matrix)))
        worst_sub = max(worst_sub, sup_norm(AB) - sup_norm(A) * sup_norm(B))
        worst_mixed = max(worst_mixed, op_norm(AB) - sup_norm(A) * op_norm(B))
        C = rng.uniform(0, 1, (d, d))
        C /= C.sum(axis=0)
        worst_chan = max(worst_chan, abs(sup_norm(RegionTransformation(("x",), (C,), s)) - 1))
        samples += 1
    c.check("at least 200 samples", samples >= 200, samples=samples)
    c.check("|op - sup| <= 1e-9", worst_eq <= tol, worst=worst_eq)
    c.check("sup norm agrees with the LP", worst_lp <= tol, worst=worst_lp)
    c.check("op norm agrees with vertex enumeration", worst_vertex <= tol, worst=worst_vertex)
    c.check("sup(AB) <= sup(A) sup(B)", worst_sub <= tol, worst_excess=worst_sub)
    c.check("op(AB) <= sup(A) op(B)", worst_mixed <= tol, worst_excess=worst_mixed)
    c.check("channels have sup norm 1", worst_chan <= tol, worst=worst_chan)
    return c


def criterion_5(seed=DEFAULT_SEED):
    c = Criterion(5, "wrapping: shift on a Z window vs Z8, with a corrupted negative control")
    q = QuotientMap(L.Z(), L.Z(8))
    src, tgt = build_graph(L.Z(), 16), build_graph(L.Z(8))
    for system in (Qubit(), Classical(2)):
        rule = L.shift_rule(system)
        rep = wrap_verify(rule, src, tgt, q, steps=3)
        c.check(
            f"{system.backend} shift matches for 3 steps with deviation 0",
            rep.verdict == "match" and rep.max_deviation == 0.0 and len(rep.comparison) == 3 * len(spanning_set(system, 0)),
            verdict=rep.verdict,
            max_deviation=rep.max_deviation,
        )
        bad = wrap_verify(rule, src, tgt, q, steps=3, target_rule=rule.perturbed(1e-3))
        c.check(
            f"{system.backend} corrupted rule gives mismatch",
            bad.verdict == "mismatch" and bad.max_deviation >= 1e-4,
            verdict=bad.verdict,
            max_deviation=bad.max_deviation,
        )
    return c


def criterion_6(seed=DEFAULT_SEED):
    c = Criterion(6, "forward then backward evolution is the identity on spanning sets")
    for name, auto in bundled().items():
        worst = 0.0
        for g in auto.vertices:
            for _, F in spanning_set(auto.system, g, ANCILLA):
                X = evolve_transformation(auto, F, "forward").payload
                Y = evolve_transformation(auto, X, "backward").payload
                region = tuple(dict.fromkeys(F.region + Y.region))
                pairs = zip(Y.embedded(region), F.embedded(region))
                worst = max(worst, max(max_abs(a - b) for a, b in pairs))
        c.check(f"{name} round trip within 1e-9", worst <= 1e-9, worst=worst)
    return c


def criterion_7(seed=DEFAULT_SEED):
    c = Criterion(7, "translation invariance of the bundled automata")
    for name, auto in bundled().items():
        rep = check_translation_invariance(auto)
        c.check(f"{name} invariant (residual < 1e-10)", rep.passed and rep.residual < 1e-10,
                residual=rep.residual, method=rep.method)
    auto = perturbed()
    rep = check_translation_invariance(auto)
    c.check(
        "site-perturbed shift fails and names the perturbed site",
        (not rep.passed) and list(rep.offending_sites) == [L.PERTURBED_SITE],
        offending=_sites(auto.graph, rep.offending_sites),
        residual=rep.residual,
    )
    return c


def criterion_8(seed=DEFAULT_SEED):
    c = Criterion(8, "linear fermionic walks: unitarity and the pedantic2 gate")
    g8 = build_graph(L.Z(8))
    ok, res, _ = fermionic_unitarity(L.HADAMARD_WALK, ("a", "a^-1"), g8, 2)
    c.check("balanced two-mode walk on Z8 unitary (residual < 1e-12)", ok and res < 1e-12, residual=res)
    ok, res, _ = fermionic_unitarity(L.UNBALANCED_WALK, ("a", "a^-1"), g8, 2)
    c.check("unbalanced walk fails unitarity", not ok, residual=res)
    q = QuotientMap(L.Z2(), L.torus(6, 5))
    rep = wrap_verify(L.conditional_shift_walk_rule(), build_graph(L.Z2(), 6), build_graph(L.torus(6, 5)), q, steps=1)
    c.check(
        "Z^2 -> Z6xZ5 refused for the fermionic walk",
        rep.verdict == "hypotheses-failed" and rep.quotient_report.level_requested == "pedantic2",
        verdict=rep.verdict,
        level_reached=rep.quotient_report.level_reached,
    )
    return c


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
}


def run_criteria(seed=DEFAULT_SEED, numbers=None):
    return [CRITERIA[n](seed) for n in (numbers or sorted(CRITERIA))]


def criterion_9(seed=DEFAULT_SEED, render=None):
    """Re-run criteria 1-8 from cold caches and compare the serialized reports."""
    from .io import dumps_report

    render = render or (lambda crits: dumps_report({"criteria": [x.to_json() for x in crits]}, "selftest", seed))
    c = Criterion(9, "identical seed gives byte-identical reports")
    texts = []
    for _ in range(2):
        clear_caches()
        texts.append(render(run_criteria(seed)))
    c.check("two runs byte-identical", texts[0] == texts[1], bytes=len(texts[0]))
    return c
