"""Hypothesis levels reached by Z^k -> Z_m1 x ... x Z_mk over a range of moduli."""

import argparse
import itertools

from opca.group_engine import QuotientMap, cyclic_presentation, free_abelian_presentation
from opca.quotient import check_level
from opca.wrap import injectivity_radius


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--min", type=int, default=2)
    p.add_argument("--max", type=int, default=8)
    args = p.parse_args(argv)
    print(f"{'moduli':>12}  {'level':>10}  rho")
    for moduli in itertools.combinations_with_replacement(range(args.max, args.min - 1, -1), args.dim):
        q = QuotientMap(free_abelian_presentation(args.dim), cyclic_presentation(*moduli))
        level = check_level(q, "pedantic2").level_reached
        rho = injectivity_radius(q)
        print(f"{'x'.join(map(str, moduli)):>12}  {level:>10}  {rho}")


if __name__ == "__main__":
    main()
