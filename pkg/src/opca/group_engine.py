"""Words over a generator alphabet, concrete group models and presentations.

Membership of a word in the normal closure of the relators is decided by
evaluating it in a concrete model carried by the presentation.  Four model
families are provided: free abelian groups, finite products of cyclic groups,
finite groups given by a multiplication table, and a length-bounded window of
a free group.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class WordError(ValueError):
    """Malformed word or unknown generator label."""

    def __init__(self, message, column=None):
        self.column = column
        if column is not None:
            message = f"{message} (column {column})"
        super().__init__(message)


class WindowExceeded(ValueError):
    """A free-window evaluation left the declared length bound."""


class PresentationError(ValueError):
    """Invalid presentation file or inconsistent model."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True, order=True)
class GeneratorSymbol:
    label: str
    sign: int = 1

    def __post_init__(self):
        if not self.label:
            raise WordError("empty generator label")
        if self.sign not in (1, -1):
            raise WordError(f"exponent sign must be +1 or -1, got {self.sign}")

    def inverse(self) -> "GeneratorSymbol":
        return GeneratorSymbol(self.label, -self.sign)

    def __str__(self):
        return self.label if self.sign == 1 else f"{self.label}^-1"


@dataclass(frozen=True)
class Word:
    """A freely reduced word; the empty word is the identity."""

    symbols: tuple = ()

    def __post_init__(self):
        for x, y in zip(self.symbols, self.symbols[1:]):
            if x.label == y.label and x.sign == -y.sign:
                raise WordError(f"word is not freely reduced at {x}{y}")

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __mul__(self, other: "Word") -> "Word":
        return free_reduce(self.symbols + other.symbols)

    def inverse(self) -> "Word":
        return Word(tuple(s.inverse() for s in reversed(self.symbols)))

    def is_identity(self):
        return not self.symbols

    def labels(self):
        return {s.label for s in self.symbols}

    def __str__(self):
        if not self.symbols:
            return "1"
        parts = []
        for s, run in itertools.groupby(self.symbols):
            k = len(list(run)) * s.sign
            parts.append(s.label if k == 1 else f"{s.label}^{k}")
        return "".join(parts)

    @classmethod
    def parse(cls, text: str, alphabet: Sequence[str] | None = None) -> "Word":
        return free_reduce(parse_symbols(text, alphabet))


IDENTITY_WORD = Word()


def free_reduce(symbols: Iterable[GeneratorSymbol], alphabet=None) -> Word:
    """Cancel adjacent inverse pairs; stack-based, hence confluent."""
    stack = []
    for s in symbols:
        if alphabet is not None and s.label not in alphabet:
            raise WordError(f"unknown generator {s.label!r}")
        if stack and stack[-1].label == s.label and stack[-1].sign == -s.sign:
            stack.pop()
        else:
            stack.append(s)
    return Word(tuple(stack))


_EXP = re.compile(r"\^\s*(-?\d+)")
_FREE_LABEL = re.compile(r"[A-Za-z][0-9_]*")
_IDENTITY_TOKENS = ("1", "λ", "lambda")


def tokenize(text: str, alphabet: Sequence[str] | None = None):
    """Parse ``a b^-1 a^3`` or ``ab^-1a^3`` into (symbol, column) pairs.

    With an alphabet, labels are matched greedily against it, so multi-letter
    generator names work in concatenated form.  Without one, a label is a
    letter followed by optional digits or underscores.  Columns are 1-based.
    """
    out = []
    if text.strip() in _IDENTITY_TOKENS or not text.strip():
        return out
    labels = sorted(alphabet, key=len, reverse=True) if alphabet else None
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace() or c in "*·.":
            i += 1
            continue
        if labels is not None:
            label = next((x for x in labels if text.startswith(x, i)), None)
        else:
            m = _FREE_LABEL.match(text, i)
            label = m.group(0) if m else None
        if label is None:
            raise WordError(f"unexpected character {c!r} in word {text!r}", i + 1)
        start = i
        i += len(label)
        power = 1
        m = _EXP.match(text, i)
        if m:
            power = int(m.group(1))
            i = m.end()
        elif i < n and text[i] == "^":
            raise WordError(f"malformed exponent in word {text!r}", i + 1)
        sym = GeneratorSymbol(label, 1 if power > 0 else -1)
        out.extend([(sym, start + 1)] * abs(power))
    return out


def parse_symbols(text: str, alphabet: Sequence[str] | None = None):
    """Raw (unreduced) symbol list of a word literal."""
    return [s for s, _ in tokenize(text, alphabet)]


def word(text: str, alphabet=None) -> Word:
    return Word.parse(text, alphabet)


# ---------------------------------------------------------------------------
# group models


class GroupModel:
    """Concrete evaluable group; subclasses fix the element representation."""

    finite = False

    def identity(self):
        raise NotImplementedError

    def multiply(self, x, y):
        raise NotImplementedError

    def invert(self, x):
        raise NotImplementedError

    def generator(self, label):
        try:
            return self.generator_map[label]
        except KeyError:
            raise WordError(f"generator {label!r} is not mapped by the model") from None

    def elements(self):
        raise NotImplementedError(f"{type(self).__name__} is infinite")

    def sort_key(self, x):
        return x

    def element_to_json(self, x):
        return list(x)

    def element_from_json(self, obj):
        return tuple(int(v) for v in obj)

    def describe(self):
        raise NotImplementedError


def _unit_map(labels, dim):
    if len(labels) != dim:
        raise PresentationError(
            f"default generator map needs {dim} generators, got {len(labels)}"
        )
    return {lab: tuple(int(i == k) for i in range(dim)) for k, lab in enumerate(labels)}


@dataclass(frozen=True, eq=False)
class FreeAbelian(GroupModel):
    dim: int
    generator_map: dict = field(default_factory=dict)

    def identity(self):
        return (0,) * self.dim

    def multiply(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def invert(self, x):
        return tuple(-a for a in x)

    def describe(self):
        return {"free_abelian": self.dim}


@dataclass(frozen=True, eq=False)
class CyclicProduct(GroupModel):
    moduli: tuple
    generator_map: dict = field(default_factory=dict)
    finite = True

    def __post_init__(self):
        if not self.moduli or any(int(m) < 1 for m in self.moduli):
            raise PresentationError(f"cyclic moduli must be positive: {self.moduli}")

    def identity(self):
        return (0,) * len(self.moduli)

    def multiply(self, x, y):
        return tuple((a + b) % m for a, b, m in zip(x, y, self.moduli))

    def invert(self, x):
        return tuple((-a) % m for a, m in zip(x, self.moduli))

    def elements(self):
        return list(itertools.product(*[range(m) for m in self.moduli]))

    def describe(self):
        return {"cyclic": list(self.moduli)}


@dataclass(frozen=True, eq=False)
class FiniteTable(GroupModel):
    """Finite group from a multiplication table over named elements."""

    names: tuple
    table: tuple  # table[i][j] = index of names[i] * names[j]
    generator_map: dict = field(default_factory=dict)
    finite = True

    def __post_init__(self):
        n = len(self.names)
        t = np.asarray(self.table, dtype=int)
        if t.shape != (n, n):
            raise PresentationError(f"multiplication table must be {n}x{n}")
        if t.min() < 0 or t.max() >= n:
            raise PresentationError("multiplication table is not closed")
        ids = [i for i in range(n) if (t[i] == np.arange(n)).all() and (t[:, i] == np.arange(n)).all()]
        if not ids:
            raise PresentationError("multiplication table has no identity")
        e = ids[0]
        for i in range(n):
            if not (t[i] == e).any() or not (t[:, i] == e).any():
                raise PresentationError(f"element {self.names[i]!r} has no inverse")
        # associativity: exhaustive for small tables, seeded sample otherwise
        if n <= 24:
            triples = itertools.product(range(n), repeat=3)
        else:
            rng = np.random.default_rng(0)
            triples = rng.integers(0, n, size=(4096, 3))
        for i, j, k in triples:
            if t[t[i, j], k] != t[i, t[j, k]]:
                raise PresentationError("multiplication table is not associative")
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_e", e)
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(self.names)})
        object.__setattr__(self, "_inv", {i: int(np.flatnonzero(t[i] == e)[0]) for i in range(n)})

    def identity(self):
        return self.names[self._e]

    def multiply(self, x, y):
        return self.names[self._t[self._index[x], self._index[y]]]

    def invert(self, x):
        return self.names[self._inv[self._index[x]]]

    def elements(self):
        return list(self.names)

    def sort_key(self, x):
        return self._index[x]

    def element_to_json(self, x):
        return x

    def element_from_json(self, obj):
        if obj not in self._index:
            raise WordError(f"unknown element {obj!r}")
        return obj

    def describe(self):
        return {"table": {"elements": list(self.names), "table": [list(r) for r in self._t.tolist()]}}


@dataclass(frozen=True, eq=False)
class FreeWindow(GroupModel):
    """Free group on the declared generators, elements are reduced words."""

    max_length: int
    generators: tuple = ()

    def __post_init__(self):
        object.__setattr__(
            self, "generator_map",
            {g: Word((GeneratorSymbol(g),)) for g in self.generators},
        )

    def _check(self, w):
        if len(w) > self.max_length:
            raise WindowExceeded(
                f"free-window element {w} has length {len(w)} > {self.max_length}"
            )
        return w

    def identity(self):
        return IDENTITY_WORD

    def multiply(self, x, y):
        return self._check(x * y)

    def invert(self, x):
        return x.inverse()

    def sort_key(self, x):
        order = {g: i for i, g in enumerate(self.generators)}
        return (len(x), [(order[s.label], -s.sign) for s in x])

    def element_to_json(self, x):
        return str(x)

    def element_from_json(self, obj):
        return self._check(Word.parse(obj, self.generators))

    def describe(self):
        return {"free_window": self.max_length}


def evaluate(w: Word, m: GroupModel):
    """Evaluate a word left to right in a model."""
    x = m.identity()
    for s in w.symbols:
        g = m.generator(s.label)
        x = m.multiply(x, g if s.sign == 1 else m.invert(g))
    return x


def evaluate_raw(symbols, m: GroupModel):
    """Evaluate an unreduced symbol sequence (products are taken in the model)."""
    x = m.identity()
    for s in symbols:
        g = m.generator(s.label)
        x = m.multiply(x, g if s.sign == 1 else m.invert(g))
    return x


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True, eq=False)
class Presentation:
    generators: tuple
    relators: tuple
    model: GroupModel
    name: str = ""

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(set(gens)) != len(gens) or not gens:
            raise PresentationError(f"generator labels must be distinct and nonempty: {gens}")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", tuple(self.relators))
        for g in gens:
            self.model.generator(g)
        e = self.model.identity()
        for r in self.relators:
            unknown = r.labels() - set(gens)
            if unknown:
                raise PresentationError(f"relator {r} uses undeclared generators {sorted(unknown)}")
            if evaluate(r, self.model) != e:
                raise PresentationError(f"relator {r} does not evaluate to the identity in the model")

    def symbols(self):
        """Inverse-closed generating set in declared order: a, a^-1, b, b^-1, ..."""
        return [GeneratorSymbol(g, s) for g in self.generators for s in (1, -1)]

    def word(self, text):
        return Word.parse(text, self.generators)

    def evaluate(self, w):
        return evaluate(w, self.model)

    def is_identity(self, w):
        return evaluate(w, self.model) == self.model.identity()

    def self_inverse(self, label):
        g = self.model.generator(label)
        return self.model.multiply(g, g) == self.model.identity()

    def to_json(self):
        out = {
            "generators": list(self.generators),
            "relators": [str(r) for r in self.relators],
            "model": self.model.describe(),
        }
        if self.name:
            out["name"] = self.name
        return out


def in_relator_subgroup(w: Word, p: Presentation) -> bool:
    return p.is_identity(w)


def _line_col(text, offset):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _string_offsets(raw, key, values):
    """Locate each string of a JSON list field; best effort for diagnostics."""
    pos = raw.find(f'"{key}"')
    offsets = []
    for v in values:
        literal = json.dumps(v, ensure_ascii=False)
        at = raw.find(literal, max(pos, 0))
        if at < 0:
            at = raw.find(json.dumps(v), max(pos, 0))
        offsets.append(at + 1 if at >= 0 else None)
        if at >= 0:
            pos = at + len(literal)
    return offsets


def _model_from_json(obj, generators, generator_map=None):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise PresentationError(
            'model must be one of {"free_abelian": d}, {"cyclic": [...]}, '
            '{"table": {...}}, {"free_window": L}'
        )
    (kind, arg), = obj.items()
    if kind == "free_abelian":
        d = int(arg)
        gmap = generator_map or _unit_map(generators, d)
        return FreeAbelian(d, {k: tuple(int(x) for x in v) for k, v in gmap.items()})
    if kind == "cyclic":
        moduli = tuple(int(x) for x in arg)
        gmap = generator_map or _unit_map(generators, len(moduli))
        gmap = {k: tuple(int(x) % m for x, m in zip(v, moduli)) for k, v in gmap.items()}
        return CyclicProduct(moduli, gmap)
    if kind == "table":
        names = tuple(str(x) for x in arg["elements"])
        gmap = generator_map or arg.get("generators")
        if gmap is None:
            raise PresentationError("table model needs a generator map")
        return FiniteTable(names, tuple(tuple(r) for r in arg["table"]), dict(gmap))
    if kind == "free_window":
        return FreeWindow(int(arg), tuple(generators))
    raise PresentationError(f"unknown model kind {kind!r}")


def presentation_from_dict(obj, raw: str | None = None) -> Presentation:
    if not isinstance(obj, dict):
        raise PresentationError("presentation must be a JSON object")
    for key in ("generators", "relators", "model"):
        if key not in obj:
            raise PresentationError(f"missing field {key!r}")
    gens = [str(g) for g in obj["generators"]]
    rel_texts = list(obj["relators"])
    offsets = _string_offsets(raw, "relators", rel_texts) if raw else [None] * len(rel_texts)
    relators = []
    for text, off in zip(rel_texts, offsets):
        try:
            tokens = tokenize(text, gens)
            for (x, _), (y, col) in zip(tokens, tokens[1:]):
                if x.label == y.label and x.sign == -y.sign:
                    raise WordError(f"relator is not freely reduced at {x}{y}", col)
            relators.append(Word(tuple(s for s, _ in tokens)))
        except WordError as exc:
            if raw is not None and off is not None:
                line, col = _line_col(raw, off + (exc.column or 1) - 1)
                raise PresentationError(f"relator {text!r}: {exc}", line, col) from None
            raise PresentationError(f"relator {text!r}: {exc}") from None
    model = _model_from_json(obj["model"], gens, obj.get("generator_map"))
    return Presentation(tuple(gens), tuple(relators), model, obj.get("name", ""))


def load_presentation(path) -> Presentation:
    with open(path, encoding="utf-8") as fh:
        raw = fh.read()
    return parse_presentation(raw)


def parse_presentation(raw: str) -> Presentation:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise PresentationError(exc.msg, exc.lineno, exc.colno) from None
    return presentation_from_dict(obj, raw)


# ---------------------------------------------------------------------------
# quotient maps


@dataclass(frozen=True, eq=False)
class QuotientMap:
    """Homomorphism G -> H fixed by sending each generator to its namesake."""

    source: Presentation
    target: Presentation
    extra_relators: tuple = None

    def __post_init__(self):
        if tuple(self.source.generators) != tuple(self.target.generators):
            raise PresentationError(
                "source and target must declare the same generator labels in the same order"
            )
        extras = self.extra_relators
        if extras is None:
            extras = tuple(r for r in self.target.relators if not self.source.is_identity(r))
        object.__setattr__(self, "extra_relators", tuple(extras))
        for r in tuple(self.source.relators) + tuple(extras):
            if not self.target.is_identity(r):
                raise PresentationError(f"relator {r} is not trivial in the target model")

    def image(self, w: Word):
        return self.target.evaluate(w)


def cyclic_presentation(*moduli, labels=None, name=None) -> Presentation:
    """Presentation of Z_{n1} x ... with commuting generators a, b, c, ..."""
    labels = labels or "abcdefgh"[: len(moduli)]
    rel = [Word(tuple([GeneratorSymbol(x)] * n)) for x, n in zip(labels, moduli)]
    for x, y in itertools.combinations(labels, 2):
        rel.append(free_reduce([GeneratorSymbol(x), GeneratorSymbol(y), GeneratorSymbol(x, -1), GeneratorSymbol(y, -1)]))
    model = CyclicProduct(tuple(moduli), _unit_map(labels, len(moduli)))
    name = name or "x".join(f"Z{n}" for n in moduli)
    return Presentation(tuple(labels), tuple(rel), model, name)


def free_abelian_presentation(dim, labels=None) -> Presentation:
    labels = labels or "abcdefgh"[:dim]
    rel = [
        free_reduce([GeneratorSymbol(x), GeneratorSymbol(y), GeneratorSymbol(x, -1), GeneratorSymbol(y, -1)])
        for x, y in itertools.combinations(labels, 2)
    ]
    return Presentation(tuple(labels), tuple(rel), FreeAbelian(dim, _unit_map(labels, dim)), f"Z^{dim}")


def free_group_presentation(labels, max_length) -> Presentation:
    return Presentation(tuple(labels), (), FreeWindow(max_length, tuple(labels)), f"F{len(labels)}")
