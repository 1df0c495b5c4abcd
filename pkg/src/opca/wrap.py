"""Run one local rule on an infinite-group window and on a finite quotient and
compare the local evolutions site by site.

The quotient map phi sends a source vertex to the image of its BFS word.  It is
injective on every ball of radius

    rho = floor((L - 1) / 2),   L = length of the shortest nontrivial kernel word,

so observables are only compared while their light cone stays inside such a
ball.  The window itself must also contain the cone with one site to spare.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automaton import (
    EvolutionError,
    LocalRule,
    ProbeTooSmall,
    RuleError,
    WrappedAutomaton,
    evolve_transformation,
    validate_rule,
)
from .backend import RegionTransformation, spanning_set
from .cayley import CayleyGraph, build_graph
from .constants import tolerances
from .group_engine import QuotientMap
from .quotient import QuotientReport, check_level
from .siteops import max_abs

REQUIRED_LEVEL = {"classical": "pedantic", "qubit": "pedantic", "fermionic": "pedantic2"}


class SafeRadiusError(ValueError):
    """The requested comparison does not fit in the window or the injectivity radius."""


@dataclass
class WrapReport:
    quotient_report: QuotientReport
    rule_valid_on_source: bool | None
    rule_valid_on_target: bool | None
    comparison: list = field(default_factory=list)  # (observable, steps, deviation)
    safe_radius_used: int = 0
    injectivity_radius: int | None = None
    window_radius: int | None = None
    verdict: str = "hypotheses-failed"
    notes: list = field(default_factory=list)

    @property
    def max_deviation(self):
        return max((c[2] for c in self.comparison), default=0.0)

    def to_json(self):
        return {
            "quotient_report": self.quotient_report.to_json(),
            "rule_valid_on_source": self.rule_valid_on_source,
            "rule_valid_on_target": self.rule_valid_on_target,
            "comparison": [
                {"observable": name, "steps": t, "max_deviation": float(dev)} for name, t, dev in self.comparison
            ],
            "max_deviation": float(self.max_deviation),
            "safe_radius_used": self.safe_radius_used,
            "injectivity_radius": self.injectivity_radius,
            "window_radius": self.window_radius,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


def shortest_kernel_length(q: QuotientMap, limit=None):
    """Length of the shortest nontrivial source element mapped to the identity.

    Searches the source ball up to ``limit`` (default: order of the target);
    returns None when nothing is found within it.
    """
    target = build_graph(q.target)
    limit = len(target) if limit is None else limit
    src = q.source
    m = src.model
    ball = build_graph(src, window_radius=limit) if not m.finite else build_graph(src)
    best = None
    for g in ball.vertices:
        if g == ball.identity:
            continue
        w = ball.word_of(g)
        if q.target.is_identity(w) and (best is None or len(w) < best):
            best = len(w)
    return best


def injectivity_radius(q: QuotientMap, limit=None):
    L = shortest_kernel_length(q, limit)
    if L is None:
        limit = len(build_graph(q.target)) if limit is None else limit
        return limit // 2
    return (L - 1) // 2


def phi_map(source: CayleyGraph, q: QuotientMap, target: CayleyGraph):
    """Vertex map of the quotient restricted to the source window."""
    return {g: q.image(source.word_of(g)) for g in source.vertices}


def default_observables(system, site):
    return [(name, F) for name, F in spanning_set(system, site)]


def _compare(src: RegionTransformation, tgt: RegionTransformation, phi):
    """max entry deviation after mapping the source region through phi."""
    mapped = [phi.get(s, s) for s in src.region]
    if len(set(mapped)) != len(mapped):
        raise SafeRadiusError("phi is not injective on the evolved support")
    region = tuple(dict.fromkeys(list(tgt.region) + mapped))
    sp = tgt.system.space(region)
    a = RegionTransformation(tuple(mapped), src.ops, src.system, src.weights).embedded(region)
    b = tgt.embedded(region)
    if len(a) != len(b):
        return float("inf")
    return max(max_abs(x - y) for x, y in zip(a, b)) if sp.dim else 0.0


def wrap_verify(
    rule: LocalRule,
    source: CayleyGraph,
    target: CayleyGraph,
    q: QuotientMap,
    observables=None,
    steps=1,
    target_rule: LocalRule | None = None,
    base=None,
    tol=None,
    level=None,
):
    """Compare evolutions of the same rule on a window of G and on H = G/K.

    ``target_rule`` replaces the rule on the quotient side (negative controls).
    ``observables`` is a list of (name, transformation at ``base``) pairs; the
    default is the single-site spanning list.
    """
    tol = tolerances().equality if tol is None else tol
    target_rule = target_rule or rule
    level = level or REQUIRED_LEVEL[rule.system.backend]
    qrep = check_level(q, level)
    base = source.identity if base is None else base

    rho = injectivity_radius(q)
    ell = rule.scheme(source).max_offset_length
    observables = observables or default_observables(rule.system, base)
    dist = source.distances_from(base)
    obs_radius = max(
        (dist.get(s, 0) for _, F in observables for s in F.region if s in source), default=0
    )
    needed = steps * ell + obs_radius + 1
    report = WrapReport(qrep, None, None, safe_radius_used=needed, injectivity_radius=rho,
                        window_radius=source.window_radius)
    if not qrep.passed:
        report.notes.append(f"quotient hypotheses fail at level {level}: reached {qrep.level_reached}")
        return report
    base_dist = dist.get(source.identity, 0)
    if source.window_radius is not None and needed + base_dist > source.window_radius:
        raise SafeRadiusError(
            f"{steps} steps with offsets of length {ell} need window radius {needed + base_dist}, "
            f"have {source.window_radius}"
        )
    if steps * ell + obs_radius > rho:
        raise SafeRadiusError(
            f"{steps} steps with offsets of length {ell} reach radius {steps * ell + obs_radius}, "
            f"beyond the injectivity radius {rho} of the quotient"
        )

    for side, r, g in (("source", rule, source), ("target", target_rule, target)):
        try:
            ok = validate_rule(r, g, base if side == "source" else None, tol).passed
        except ProbeTooSmall as exc:
            ok = False
            report.notes.append(f"{side}: {exc}")
        setattr(report, f"rule_valid_on_{side}", ok)

    phi = phi_map(source, q, target)
    src_auto = WrappedAutomaton(source, rule.system, {}, rule, None, rule.name)
    tgt_auto = WrappedAutomaton(target, target_rule.system, {}, target_rule, None, target_rule.name)
    for name, F in observables:
        Ft = F.map_sites({s: phi.get(s, s) for s in F.region})
        a, b = F, Ft
        for t in range(1, steps + 1):
            try:
                a = evolve_transformation(src_auto, a, "forward", 1, strict=False).payload
                b = evolve_transformation(tgt_auto, b, "forward", 1, strict=False).payload
            except (EvolutionError, RuleError) as exc:
                report.notes.append(f"{name}: {exc}")
                report.comparison.append((name, t, float("inf")))
                break
            report.comparison.append((name, t, _compare(a, b, phi)))
    report.verdict = "match" if report.max_deviation <= tol else "mismatch"
    return report


# ---------------------------------------------------------------------------
# linear one-particle rules


def one_particle_matrix(coefficients, offsets, graph: CayleyGraph, modes):
    """U with block (g h, g) = T_h, i.e. V e_g = sum over h of e_{g h} (x) T_h."""
    if len(coefficients) != len(offsets):
        raise RuleError("one coefficient matrix per offset is required")
    n = len(graph.vertices)
    U = np.zeros((n * modes, n * modes), dtype=complex)
    for T, h in zip(coefficients, offsets):
        T = np.asarray(T, dtype=complex)
        if T.shape != (modes, modes):
            raise RuleError(f"coefficient matrix of shape {T.shape}, expected {(modes, modes)}")
        for g in graph.vertices:
            i, j = graph.index(graph.mul(g, h)), graph.index(g)
            U[i * modes:(i + 1) * modes, j * modes:(j + 1) * modes] += T
    return U


def fermionic_unitarity(coefficients, offsets, graph: CayleyGraph, modes, tol=None):
    """(unitary?, residual, N+_e) for a linear rule given by its coefficients."""
    tol = tolerances().unitarity if tol is None else tol
    U = one_particle_matrix(coefficients, offsets, graph, modes)
    eye = np.eye(U.shape[0])
    residual = max(max_abs(U.conj().T @ U - eye), max_abs(U @ U.conj().T - eye))
    e = graph.identity
    col = U[:, graph.index(e) * modes:(graph.index(e) + 1) * modes]
    nbhd = [v for v in graph.vertices if np.abs(col[graph.index(v) * modes:(graph.index(v) + 1) * modes]).max() > tol]
    return residual <= tol, float(residual), nbhd
