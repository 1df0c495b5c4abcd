"""Numerical tolerances and size limits shared by every module.

All floating comparisons in the package go through this table so that a
single override (for example from the command line) changes them coherently.
"""

from contextlib import contextmanager
from dataclasses import dataclass, fields, replace

import numpy as np

SCHEMA_VERSION = 1

# largest joint dimension for which a dense global operator is built
MAX_GLOBAL_DIM = 2**14
# largest doubled-lattice state vector used while extracting V from blocks
MAX_SWEEP_DIM = 2**20
# largest dense operator used inside block-local conjugations
MAX_LOCAL_DIM = 2**12

MIN_TOLERANCE = 100 * np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    support: float = 1e-9  # max-entry deviation for "acts trivially on a site"
    equality: float = 1e-9  # comparison of evolved payloads and norms
    invariance: float = 1e-10  # translation invariance, W^-1 = S W S, round trips
    unitarity: float = 1e-10  # fermionic one-particle unitarity
    positivity: float = 1e-10  # eigenvalue threshold for positive maps
    signal: float = 1e-10  # marginal change counted as signalling
    stochastic: float = 1e-12  # classical column sums / entries

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value >= MIN_TOLERANCE:
                raise ValueError(
                    f"tolerance {f.name}={value!r} is below 100 * machine epsilon"
                )

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_TOLERANCES = Tolerances()

_active = [DEFAULT_TOLERANCES]


def tolerances() -> Tolerances:
    """The tolerance table in effect (the defaults unless overridden)."""
    return _active[-1]


@contextmanager
def use_tolerances(t: Tolerances):
    _active.append(t)
    try:
        yield t
    finally:
        _active.pop()
