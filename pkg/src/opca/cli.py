"""Command-line entry point ``opca``.

Exit codes: 0 when the analysis passes, 1 when it runs but the answer is no,
2 for malformed input or tool errors.  Reports are JSON with a schema_version
and the seed; without ``--out`` they go to $OPCA_OUTPUT_DIR/<command>.json when
that variable is set and to stdout otherwise.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import acceptance
from .automaton import (
    EvolutionError,
    LocalRule,
    RuleError,
    SizeLimitError,
    WrappedAutomaton,
    assemble,
    assembly_checks,
    check_translation_invariance,
    evolve_state,
    evolve_transformation,
    extract_blocks,
    validate_rule,
    windowed,
)
from .backend import RegionEffect, RegionTransformation, basis_state, op_norm, sup_norm
from .cayley import ClippingError, NeighborhoodScheme, build_graph
from .constants import DEFAULT_TOLERANCES, MAX_GLOBAL_DIM, Tolerances, tolerances, use_tolerances
from .group_engine import PresentationError, QuotientMap, WordError
from .influence import influence_graph, influence_report
from .io import (
    GlobalRule,
    InputError,
    _read_json,
    load_rule,
    matrix_from_json,
    read_presentation,
    resolve,
    system_from_json,
    parse_operator,
    transformation_to_json,
    write_report,
)
from .quotient import check_level
from .wrap import SafeRadiusError, wrap_verify

OUTPUT_ENV = "OPCA_OUTPUT_DIR"


class Failure(Exception):
    """Analysis ran and said no (exit 1)."""


# -- shared plumbing -------------------------------------------------------------


def _graph(args, key="presentation", window=None):
    p = read_presentation(resolve(getattr(args, key)))
    w = window if window is not None else getattr(args, "window", None)
    if p.model.finite:
        return build_graph(p)
    if w is None:
        raise InputError(f"{getattr(args, key)}: infinite group, pass --window")
    return build_graph(p, window_radius=w)


def _rule(args):
    return load_rule(resolve(args.rule))


def _automaton(rule, graph, validate=True) -> WrappedAutomaton:
    if isinstance(rule, GlobalRule):
        if not graph.finite:
            raise InputError("a global rule needs a finite group")
        return rule.automaton(graph)
    if not graph.finite:
        return windowed(rule, graph)
    if rule.system.dim(len(graph.vertices)) > MAX_GLOBAL_DIM:
        auto = WrappedAutomaton(graph, rule.system, {}, rule, None, rule.name)
        for g in graph.vertices:
            auto.block(g)
        return auto
    return assemble(rule, graph, validate=validate)


def _site(graph, text):
    if text is None:
        return graph.identity
    try:
        return graph.parse_site(text)
    except (ValueError, ClippingError) as exc:
        raise InputError(str(exc)) from None


def _sites(graph, sites):
    return [graph.site_to_json(s) for s in sites]


# -- subcommands ---------------------------------------------------------------------


def cmd_graph(args):
    graph = _graph(args)
    report = graph.describe() | {
        "vertices": _sites(graph, graph.vertices),
        "edges": [[graph.site_to_json(g), graph.site_to_json(y), h] for g, y, h in graph.edges],
    }
    dot = graph.to_dot()
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
        report["dot"] = os.path.basename(args.dot)
    else:
        report["dot_source"] = dot
    return report


def cmd_quotient_check(args):
    q = QuotientMap(read_presentation(resolve(args.source)), read_presentation(resolve(args.target)))
    rep = check_level(q, args.level)
    out = rep.to_json()
    if not rep.passed:
        raise Failure(out)
    return out


def cmd_validate_rule(args):
    rule = _rule(args)
    if isinstance(rule, GlobalRule):
        raise InputError("validate-rule needs a local rule with a block")
    graph = _graph(args)
    rep = validate_rule(rule, graph, _site(graph, args.base) if args.base else None)
    out = rep.to_json(graph)
    if not rep.passed:
        raise Failure(out)
    return out


def cmd_assemble(args):
    rule = _rule(args)
    graph = _graph(args)
    try:
        auto = _automaton(rule, graph)
    except RuleError as exc:
        raise Failure({"assembled": False, "reason": str(exc)}) from None
    checks = assembly_checks(auto)
    inv = check_translation_invariance(auto)
    out = auto.describe() | {"checks": checks, "translation": inv.to_json(graph)}
    tol = tolerances().invariance
    bad = [k for k, v in checks.items() if isinstance(v, float) and v > tol]
    if args.save_global and auto.V is not None:
        np.save(args.save_global, auto.V)
        out["global_file"] = os.path.basename(args.save_global)
    if bad:
        out["failed"] = bad
        raise Failure(out)
    return out


def _state_literal(text, auto):
    sys_ = auto.system
    if sys_.kind == "direct_sum":
        site, _, mode = text.partition(":")
        g = _site(auto.graph, site)
        return basis_state(auto.vertices, sys_, auto.graph.index(g) * sys_.d + int(mode or 0))
    digits = [int(c) for c in text.strip()]
    if len(digits) != len(auto.vertices) or max(digits) >= sys_.d:
        raise InputError(f"state literal needs {len(auto.vertices)} digits below {sys_.d}")
    return basis_state(auto.vertices, sys_, digits)


def _state_summary(state, auto, tol=1e-12):
    sys_ = auto.system
    if sys_.kind == "direct_sum":
        m = sys_.d
        amp = {}
        for i, z in enumerate(state.payload):
            if abs(z) > tol:
                g = auto.vertices[i // m]
                amp[f"{','.join(map(str, np.atleast_1d(auto.graph.site_to_json(g))))}:{i % m}"] = [float(z.real), float(z.imag)]
        return {"amplitudes": amp}
    probs = state.payload if sys_.backend == "classical" else np.real(np.diag(state.payload))
    n = len(auto.vertices)
    out = {}
    for idx in np.flatnonzero(np.abs(probs) > tol):
        digits = np.unravel_index(idx, (sys_.d,) * n)
        out["".join(map(str, digits))] = float(probs[idx])
    return {"populations": out}


def cmd_evolve(args):
    rule = _rule(args)
    graph = _graph(args)
    if (args.state is None) == (args.operator is None):
        raise InputError("pass exactly one of --state or --operator")
    if args.operator is not None:
        auto = _automaton(rule, graph, validate=False) if graph.finite else windowed(rule, graph)
        F = parse_operator(args.operator, graph, auto.system)
        X = evolve_transformation(auto, F, args.direction, args.steps).payload if args.steps else F
        return {"input": args.operator, "steps": args.steps, "direction": args.direction,
                "output": transformation_to_json(X, graph)}
    auto = _automaton(rule, graph)
    if args.steps == 0:
        return {"input": args.state, "steps": 0, "output": args.state}
    if auto.V is None:
        raise SizeLimitError("state evolution needs the global evolution; the graph is too large")
    state = _state_literal(args.state, auto)
    if args.direction == "bwd":
        auto = auto.inverse()
    out = evolve_state(auto, state, args.steps)
    return {"input": args.state, "steps": args.steps, "direction": args.direction,
            "output": _state_summary(out, auto)}


def cmd_influence(args):
    rule = _rule(args)
    graph = _graph(args)
    if not graph.finite:
        raise InputError("influence analysis needs a finite group")
    auto = _automaton(rule, graph)
    g = _site(graph, args.site)
    rep = influence_report(auto, g, jobs=args.jobs)
    out = rep.to_json(auto)
    out["direction"] = args.direction
    out["neighborhood"] = out["causal_forward"] if args.direction == "fwd" else out["causal_backward"]
    if args.graph:
        out["influence_graph"] = [[graph.site_to_json(a), graph.site_to_json(b)] for a, b in influence_graph(auto, args.jobs)]
    return out


def cmd_extract_blocks(args):
    rule = _rule(args)
    graph = _graph(args)
    auto = _automaton(rule, graph)
    if auto.V is None:
        raise SizeLimitError("block extraction needs the global evolution")
    scheme = None
    offsets = args.offsets.split(";") if args.offsets else (rule.offsets if isinstance(rule, LocalRule) else None)
    if offsets:
        scheme = NeighborhoodScheme(graph, tuple(offsets))
    rep = extract_blocks(auto.V, graph, auto.system, scheme)
    out = rep.to_json(graph)
    if scheme is not None and not all(rep.local.values()):
        raise Failure(out)
    return out


def cmd_wrap_verify(args):
    rule = _rule(args)
    if isinstance(rule, GlobalRule):
        raise InputError("wrap-verify needs a local rule")
    target_rule = load_rule(resolve(args.target_rule)) if args.target_rule else None
    source = _graph(args, "source", args.window)
    target = _graph(args, "quotient")
    q = QuotientMap(source.presentation, target.presentation)
    base = _site(source, args.base) if args.base else None
    observables = None
    if args.observable:
        observables = [(lit, parse_operator(lit, source, rule.system)) for lit in args.observable]
    rep = wrap_verify(rule, source, target, q, observables, args.steps, target_rule, base)
    out = rep.to_json()
    if rep.verdict != "match":
        raise Failure(out)
    return out


def cmd_norms(args):
    if args.suite:
        crit = acceptance.criterion_4(args.seed)
        out = crit.to_json()
        if not crit.passed:
            raise Failure(out)
        return out
    if not args.input:
        raise InputError("pass --input FILE or --suite")
    obj = _read_json(args.input)
    system = system_from_json(obj)
    kind = obj.get("kind", "transformation")
    if kind == "effect":
        x = RegionEffect(("x",), np.asarray(obj["vector"], dtype=float) if "vector" in obj
                         else matrix_from_json(obj["matrix"]), system)
    else:
        ops = obj.get("kraus") or [obj["matrix"]]
        x = RegionTransformation(("x",), tuple(matrix_from_json(m) for m in ops), system)
    out = {"kind": kind, "backend": system.backend}
    for name, fn in (("operational", op_norm), ("sup", sup_norm)):
        try:
            out[name] = fn(x)
        except NotImplementedError as exc:
            out[name] = None
            out.setdefault("notes", []).append(str(exc))
    return out


def selftest_report(seed, numbers=None):
    crits = acceptance.run_criteria(seed, numbers)
    return crits, {"criteria": [c.to_json() for c in crits], "passed": all(c.passed for c in crits)}


def cmd_selftest(args):
    crits, out = selftest_report(args.seed, args.criterion)
    for c in crits:
        print(c.line(), file=sys.stderr)
    if not args.no_determinism and not args.criterion:
        c9 = acceptance.criterion_9(args.seed)
        print(c9.line(), file=sys.stderr)
        out["criteria"].append(c9.to_json())
        out["passed"] = out["passed"] and c9.passed
    if not out["passed"]:
        raise Failure(out)
    return out


# -- argument parsing -------------------------------------------------------------------


def _tol_arg(text):
    name, sep, value = text.partition("=")
    if not sep or name not in DEFAULT_TOLERANCES.as_dict():
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE with NAME in {sorted(DEFAULT_TOLERANCES.as_dict())}")
    return name, float(value)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="report path ('-' for stdout)")
    common.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--tol", type=_tol_arg, action="append", default=[], metavar="NAME=VALUE",
                        help="override a tolerance, e.g. support=1e-8")

    p = argparse.ArgumentParser(prog="opca", description="Cellular automata on Cayley graphs of finitely presented groups.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("graph", cmd_graph, "Cayley graph of a presentation (JSON + DOT)")
    sp.add_argument("--presentation", required=True)
    sp.add_argument("--window", type=int)
    sp.add_argument("--dot", help="write the DOT file here")

    sp = add("quotient-check", cmd_quotient_check, "check the quotient hypotheses")
    sp.add_argument("--source", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--level", choices=("pedantic", "pedantic2"), default="pedantic")

    sp = add("validate-rule", cmd_validate_rule, "validate a local rule's block")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--presentation", required=True)
    sp.add_argument("--window", type=int)
    sp.add_argument("--base")

    sp = add("assemble", cmd_assemble, "assemble the global evolution from blocks")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--presentation", required=True)
    sp.add_argument("--save-global", help="store V as .npy")

    sp = add("evolve", cmd_evolve, "evolve a state or a local transformation")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--presentation", required=True)
    sp.add_argument("--window", type=int)
    sp.add_argument("--state", help="digits per site, or SITE:MODE for the one-particle sector")
    sp.add_argument("--operator", help="operator literal such as X@0 or Z@0*X@1")
    sp.add_argument("--steps", type=int, default=1)
    sp.add_argument("--direction", choices=("fwd", "bwd"), default="fwd")

    sp = add("influence", cmd_influence, "causal and signalling neighborhoods of a site")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--presentation", required=True)
    sp.add_argument("--site")
    sp.add_argument("--direction", choices=("fwd", "bwd"), default="fwd")
    sp.add_argument("--graph", action="store_true", help="include the full influence graph")

    sp = add("extract-blocks", cmd_extract_blocks, "blocks of an explicit global rule")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--presentation", required=True)
    sp.add_argument("--offsets", help="';'-separated N+_e words to test locality against")

    sp = add("wrap-verify", cmd_wrap_verify, "compare a rule on a window and on a quotient")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--source", required=True)
    sp.add_argument("--window", type=int, required=True)
    sp.add_argument("--quotient", required=True)
    sp.add_argument("--steps", type=int, default=1)
    sp.add_argument("--target-rule", help="rule used on the quotient side (negative controls)")
    sp.add_argument("--observable", action="append", help="operator literal on the source; default: spanning set")
    sp.add_argument("--base")

    sp = add("norms", cmd_norms, "operational and sup norms")
    sp.add_argument("--input", help="JSON with backend, kind and matrix/vector/kraus")
    sp.add_argument("--suite", action="store_true", help="run the randomized classical suite")

    sp = add("selftest", cmd_selftest, "run the bundled acceptance scenarios")
    sp.add_argument("--criterion", type=int, action="append", choices=sorted(acceptance.CRITERIA))
    sp.add_argument("--no-determinism", action="store_true", help="skip the rerun that compares reports")
    return p


def _destination(args):
    if args.out:
        return args.out
    base = os.environ.get(OUTPUT_ENV)
    if base:
        return os.path.join(base, f"{args.command}.json")
    return "-"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tols = Tolerances(**(DEFAULT_TOLERANCES.as_dict() | dict(args.tol)))
    except ValueError as exc:
        print(f"opca: error: {exc}", file=sys.stderr)
        return 2
    code = 0
    try:
        with use_tolerances(tols):
            report = args.func(args)
    except Failure as exc:
        report, code = exc.args[0], 1
    except (InputError, PresentationError, WordError, RuleError, SafeRadiusError, ClippingError,
            EvolutionError, SizeLimitError, NotImplementedError) as exc:
        print(f"opca {args.command}: error: {exc}", file=sys.stderr)
        return 2
    report = {"tolerances": tols.as_dict(), "result": report, "exit_code": code}
    dest = _destination(args)
    text = write_report(report, None if dest == "-" else dest, args.command, args.seed)
    if dest == "-":
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
