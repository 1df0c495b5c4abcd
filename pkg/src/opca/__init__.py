"""Cellular automata on Cayley graphs: groups, blocks, influence and wrapping."""

from .automaton import (
    LocalRule,
    WrappedAutomaton,
    assemble,
    check_translation_invariance,
    evolve_transformation,
    extract_blocks,
    from_blocks,
    from_global,
    validate_rule,
)
from .backend import Classical, Fermionic, Qubit
from .cayley import CayleyGraph, NeighborhoodScheme, build_graph
from .constants import DEFAULT_TOLERANCES, Tolerances
from .group_engine import Presentation, QuotientMap, Word, parse_presentation, word
from .influence import causal_neighborhood, influence_graph, signalling_neighborhood
from .quotient import check_level
from .wrap import fermionic_unitarity, wrap_verify

__version__ = "0.1.0"
