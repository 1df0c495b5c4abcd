"""JSON formats for rules, operators and reports.

Matrices are lists of rows; a complex entry is written as [re, im], a real
one as a plain number.  Rule files look like

    {"backend": "qubit", "offsets": ["a"], "block": {"swap": 0}}
    {"backend": "fermionic", "modes": 2, "offsets": ["a", "a^-1"],
     "coefficients": [[[0.7071, 0.7071], [0, 0]], [[0, 0], [0.7071, -0.7071]]]}
    {"backend": "classical", "global": {"gf2_offsets": ["a^-1", "1", "a"]}}

"block" is a matrix, {"swap": target} or {"dressed_swap": target, "dressing": M}.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .automaton import (
    LocalRule,
    RuleError,
    WrappedAutomaton,
    dressed_swap_block,
    from_global,
    linear_block,
    swap_block,
)
from .backend import (
    Classical,
    Fermionic,
    Qubit,
    RegionTransformation,
    SiteSystem,
    single_site_operators,
    tensor,
)
from .cayley import CayleyGraph
from .constants import SCHEMA_VERSION
from .group_engine import PresentationError, load_presentation


class InputError(ValueError):
    """Malformed input file; the CLI maps it to exit code 2."""


# -- matrices ------------------------------------------------------------------


def matrix_to_json(m):
    m = np.asarray(m)
    if np.iscomplexobj(m) and np.abs(m.imag).max(initial=0) > 0:
        return [[[float(z.real), float(z.imag)] for z in row] for row in m]
    return [[float(z.real) for z in row] for row in m]


def matrix_from_json(obj, where="matrix"):
    try:
        rows = [[complex(x[0], x[1]) if isinstance(x, list) else complex(x) for x in row] for row in obj]
    except (TypeError, ValueError, IndexError) as exc:
        raise InputError(f"{where}: entries must be numbers or [re, im] pairs ({exc})") from None
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise InputError(f"{where}: ragged or empty matrix")
    m = np.array(rows)
    return m.real.copy() if not np.abs(m.imag).any() else m


def operator_to_json(m, system: SiteSystem):
    return {"backend": system.backend, "dim": int(np.shape(m)[0]), "matrix": matrix_to_json(m)}


# -- systems -------------------------------------------------------------------


def system_from_json(obj):
    backend = obj.get("backend")
    if backend == "classical":
        return Classical(int(obj.get("local_dim", 2)))
    if backend == "qubit":
        return Qubit()
    if backend == "fermionic":
        return Fermionic(int(obj.get("modes", 1)))
    raise InputError(f"unknown backend {backend!r}; expected classical, qubit or fermionic")


def system_to_json(system: SiteSystem):
    out = {"backend": system.backend}
    if system.backend == "classical":
        out["local_dim"] = system.d
    if system.backend == "fermionic":
        out["modes"] = system.d
    return out


# -- rules -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GlobalRule:
    """A rule given on the whole finite graph rather than as a block."""

    system: SiteSystem
    name: str = ""
    gf2_offsets: tuple | None = None
    matrix: np.ndarray | None = None

    def automaton(self, graph: CayleyGraph) -> WrappedAutomaton:
        from .library import gf2_rule_matrix, linear_gf2_permutation

        if self.gf2_offsets is not None:
            V = linear_gf2_permutation(gf2_rule_matrix(graph, self.gf2_offsets))
        else:
            V = self.matrix
        return from_global(V, graph, self.system, name=self.name)


def rule_from_dict(obj):
    if not isinstance(obj, dict):
        raise InputError("rule must be a JSON object")
    system = system_from_json(obj)
    name = str(obj.get("name", ""))
    if "global" in obj:
        g = obj["global"]
        if "gf2_offsets" in g:
            if system.backend != "classical" or system.d != 2:
                raise InputError("gf2 rules need the classical bit backend")
            return GlobalRule(system, name, gf2_offsets=tuple(str(x) for x in g["gf2_offsets"]))
        if "matrix" in g:
            return GlobalRule(system, name, matrix=matrix_from_json(g["matrix"], "global.matrix"))
        raise InputError("global rule needs gf2_offsets or matrix")
    if "offsets" not in obj:
        raise InputError("missing field 'offsets'")
    offsets = tuple(str(x) for x in obj["offsets"])
    coefficients = None
    if "coefficients" in obj:
        coefficients = tuple(matrix_from_json(c, f"coefficients[{i}]") for i, c in enumerate(obj["coefficients"]))
    block = obj.get("block")
    try:
        if block is None:
            if coefficients is None:
                raise InputError("rule needs a block or coefficients")
            B = linear_block(coefficients, system.d)
        elif isinstance(block, dict) and "swap" in block:
            B = swap_block(system, len(offsets), int(block["swap"]))
        elif isinstance(block, dict) and "dressed_swap" in block:
            B = dressed_swap_block(
                system, len(offsets), int(block["dressed_swap"]), matrix_from_json(block["dressing"], "dressing")
            )
        else:
            B = matrix_from_json(block, "block")
        return LocalRule(
            offsets, system, B, int(obj.get("decomposability_bound", 4)), name,
            coefficients=tuple(np.asarray(c, dtype=complex) for c in coefficients) if coefficients else None,
        )
    except RuleError as exc:
        raise InputError(str(exc)) from None


def rule_to_dict(rule: LocalRule):
    out = system_to_json(rule.system) | {
        "name": rule.name,
        "offsets": list(rule.offsets),
        "decomposability_bound": rule.decomposability_bound,
    }
    if rule.coefficients is not None:
        out["coefficients"] = [matrix_to_json(c) for c in rule.coefficients]
    else:
        out["block"] = matrix_to_json(rule.block)
    return out


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_rule(path):
    try:
        return rule_from_dict(_read_json(path))
    except InputError as exc:
        msg = str(exc)
        raise InputError(msg if msg.startswith(str(path)) else f"{path}: {msg}") from None


def read_presentation(path):
    try:
        return load_presentation(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except PresentationError as exc:
        raise InputError(f"{path}: {exc}") from None


# -- bundled data ------------------------------------------------------------------


def data_path(name):
    return str(resources.files("opca") / "data" / name)


def resolve(path_or_name):
    """A file path, or the name of a bundled data file."""
    if os.path.exists(path_or_name):
        return path_or_name
    candidate = data_path(path_or_name if path_or_name.endswith(".json") else path_or_name + ".json")
    if os.path.exists(candidate):
        return candidate
    return path_or_name


# -- operator literals ---------------------------------------------------------------


def parse_operator(text: str, graph: CayleyGraph, system: SiteSystem) -> RegionTransformation:
    """'X@0', 'flip@2', 'Z@0*X@1' or 'I+E01@3'; site syntax as for --site."""
    names = dict(single_site_operators(system))
    out = None
    for part in text.split("*"):
        name, sep, site = part.strip().partition("@")
        if not sep:
            raise InputError(f"operator literal {part!r} must look like NAME@SITE")
        if name not in names:
            raise InputError(f"unknown operator {name!r}; known: {', '.join(names)}")
        try:
            g = graph.parse_site(site)
        except (ValueError, KeyError) as exc:
            raise InputError(f"bad site {site!r}: {exc}") from None
        F = RegionTransformation((g,), (np.asarray(names[name], dtype=system.dtype),), system)
        out = F if out is None else tensor(out, F)
    return out


def transformation_to_json(F: RegionTransformation, graph: CayleyGraph):
    return {
        "region": [graph.site_to_json(s) if s in graph else list(s) for s in F.region],
        "operators": [matrix_to_json(o) for o in F.ops],
    }


# -- reports -------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def dumps_report(obj, command, seed=None):
    body = {"schema_version": SCHEMA_VERSION, "command": command, "seed": seed} | dict(obj)
    return json.dumps(_jsonable(body), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_report(obj, path, command, seed=None):
    text = dumps_report(obj, command, seed)
    if path in (None, "-"):
        return text
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text
