"""Support of a single-site operator under repeated block evolution on a window."""

import argparse

from opca.cayley import build_graph
from opca.io import load_rule, parse_operator, read_presentation, resolve
from opca.automaton import evolve_transformation, windowed


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--rule", default="partial-swap")
    p.add_argument("--presentation", default="Z")
    p.add_argument("--window", type=int, default=8)
    p.add_argument("--operator", default="Z@0")
    p.add_argument("--steps", type=int, default=4)
    args = p.parse_args(argv)
    rule = load_rule(resolve(args.rule))
    pres = read_presentation(resolve(args.presentation))
    graph = build_graph(pres) if pres.model.finite else build_graph(pres, window_radius=args.window)
    auto = windowed(rule, graph)
    X = parse_operator(args.operator, graph, rule.system)
    for t in range(args.steps + 1):
        print(t, [graph.site_to_json(s) for s in X.region])
        if t < args.steps:
            X = evolve_transformation(auto, X).payload


if __name__ == "__main__":
    main()
