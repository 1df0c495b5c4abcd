"""Causal and signalling neighborhoods of the XOR rule b'_g = b_{g-1}+b_g+b_{g+1} on Z_r.

For each r the causal set at site 0 equals the union of the supports of row 0
of M^-1 and column 0 of M over GF(2); the table prints both sides.
"""

import argparse

import numpy as np

from opca import gf2, library
from opca.cayley import build_graph
from opca.influence import causal_neighborhood, signalling_neighborhood
from opca.library import XOR_OFFSETS, gf2_rule_matrix


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("sizes", nargs="*", type=int, default=[4, 5, 6, 7, 8, 9, 10])
    args = p.parse_args(argv)
    for r in args.sizes:
        M = gf2_rule_matrix(build_graph(library.Z(r)), XOR_OFFSETS)
        rank = gf2.rank(M)
        if rank < r:
            print(f"r={r:2d}  singular (GF(2) rank {rank})")
            continue
        auto = library.xor_automaton(r)
        causal = [s[0] for s in causal_neighborhood(auto, (0,))[0]]
        signal = [s[0] for s in signalling_neighborhood(auto, (0,))]
        Minv = gf2.inverse(M)
        algebraic = sorted(int(j) for j in set(np.flatnonzero(Minv[0])) | set(np.flatnonzero(M[:, 0])))
        print(f"r={r:2d}  causal={causal}  algebraic={algebraic}  signalling={signal}")


if __name__ == "__main__":
    main()
