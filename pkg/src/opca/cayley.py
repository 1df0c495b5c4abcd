"""Colored Cayley graphs, neighborhood schemes and the graph metric."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from .group_engine import (
    GeneratorSymbol,
    Presentation,
    Word,
    WindowExceeded,
    WordError,
    evaluate,
    free_reduce,
)


class ClippingError(ValueError):
    """A region operation would leave the (windowed) vertex set."""


# fixed palette, assigned by generator declaration order
PALETTE = ("red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan")


@dataclass(frozen=True, eq=False)
class CayleyGraph:
    presentation: Presentation
    window_radius: int | None = None
    vertices: tuple = field(init=False)

    def __post_init__(self):
        p = self.presentation
        m = p.model
        if m.finite:
            verts = m.elements()
        else:
            if self.window_radius is None:
                raise ValueError(f"model {m.describe()} is infinite; a window radius is required")
            if self.window_radius > getattr(m, "max_length", self.window_radius):
                raise ValueError(
                    f"window radius {self.window_radius} exceeds the free-window length {m.max_length}"
                )
            verts = list(self._ball(self.window_radius))
        verts.sort(key=m.sort_key)
        object.__setattr__(self, "vertices", tuple(verts))
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(verts)})
        gens = {}
        for s in p.symbols():
            g = m.generator(s.label)
            gens[s] = g if s.sign == 1 else m.invert(g)
        object.__setattr__(self, "_gen", gens)

    def _ball(self, radius):
        m = self.presentation.model
        e = m.identity()
        seen = {e: 0}
        queue = deque([e])
        while queue:
            x = queue.popleft()
            if seen[x] == radius:
                continue
            for s in self.presentation.symbols():
                g = m.generator(s.label)
                y = m.multiply(x, g if s.sign == 1 else m.invert(g))
                if y not in seen:
                    seen[y] = seen[x] + 1
                    queue.append(y)
        return seen

    # -- basic structure -------------------------------------------------

    @property
    def model(self):
        return self.presentation.model

    @property
    def finite(self):
        return self.window_radius is None

    @property
    def identity(self):
        return self.model.identity()

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v):
        return v in self._index

    def index(self, v):
        try:
            return self._index[v]
        except KeyError:
            raise ClippingError(f"{v!r} is not a vertex of the graph") from None

    def sort_sites(self, sites):
        return sorted(set(sites), key=self.index)

    def step(self, g, s: GeneratorSymbol):
        return self.model.multiply(g, self._gen[s])

    def mul(self, g, w: Word | str):
        """Right action g -> g w, erroring if the result leaves the vertex set."""
        if isinstance(w, str):
            w = self.presentation.word(w)
        try:
            x = self.model.multiply(g, evaluate(w, self.model))
        except WindowExceeded as exc:
            raise ClippingError(str(exc)) from None
        if x not in self._index:
            raise ClippingError(f"{g!r}·{w} leaves the window of radius {self.window_radius}")
        return x

    def left(self, w: Word | str, g):
        if isinstance(w, str):
            w = self.presentation.word(w)
        try:
            x = self.model.multiply(evaluate(w, self.model), g)
        except WindowExceeded as exc:
            raise ClippingError(str(exc)) from None
        if x not in self._index:
            raise ClippingError(f"{w}·{g!r} leaves the window of radius {self.window_radius}")
        return x

    def neighbors(self, g):
        """(symbol, vertex) pairs in declared generator order, inside the vertex set."""
        out = []
        for s in self.presentation.symbols():
            try:
                y = self.step(g, s)
            except WindowExceeded:
                continue
            if y in self._index:
                out.append((s, y))
        return out

    @cached_property
    def edges(self):
        """(g, g·h, h) for positive generators h whose target is a vertex."""
        out = []
        for g in self.vertices:
            for h in self.presentation.generators:
                try:
                    y = self.step(g, GeneratorSymbol(h))
                except WindowExceeded:
                    continue
                if y in self._index:
                    out.append((g, y, h))
        return out

    @cached_property
    def interior(self):
        full = 2 * len(self.presentation.generators)
        return frozenset(g for g in self.vertices if len(self.neighbors(g)) == full)

    def is_boundary(self, g):
        return g not in self.interior

    @cached_property
    def words(self):
        """BFS-tree word for every vertex reachable from the identity."""
        e = self.identity
        out = {e: Word()}
        queue = deque([e])
        while queue:
            x = queue.popleft()
            for s, y in self.neighbors(x):
                if y not in out:
                    out[y] = Word(out[x].symbols + (s,))
                    queue.append(y)
        return out

    def word_of(self, g) -> Word:
        try:
            return self.words[g]
        except KeyError:
            raise ValueError(f"{g!r} is not reachable from the identity") from None

    # -- metric ----------------------------------------------------------

    def distances_from(self, g):
        if not hasattr(self, "_dist_cache"):
            object.__setattr__(self, "_dist_cache", {})
        cache = self._dist_cache
        if g not in cache:
            self.index(g)
            dist = {g: 0}
            queue = deque([g])
            while queue:
                x = queue.popleft()
                for _, y in self.neighbors(x):
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        queue.append(y)
            cache[g] = dist
        return cache[g]

    def distance(self, g, h):
        """Path length over edges in either direction; None when unreachable."""
        self.index(h)
        return self.distances_from(g).get(h)

    def translate(self, region, w: Word | str):
        return frozenset(self.left(w, g) for g in region)

    # -- export ----------------------------------------------------------

    def site_to_json(self, g):
        return self.model.element_to_json(g)

    def site_from_json(self, obj):
        g = self.model.element_from_json(obj)
        self.index(g)
        return g

    def parse_site(self, text: str):
        """Site literal: comma-separated coordinates, an element name, or a word."""
        text = text.strip()
        m = self.model
        try:
            coords = tuple(int(x) for x in text.split(","))
        except ValueError:
            coords = None
        if coords is not None and hasattr(m, "moduli"):
            coords = tuple(c % n for c, n in zip(coords, m.moduli))
        if coords is not None and coords in self._index:
            return coords
        if text in self._index:
            return text
        try:
            return self.left(self.presentation.word(text), self.identity)
        except WordError as exc:
            raise ValueError(f"cannot parse site {text!r}: {exc}") from None

    def to_dot(self, name="G"):
        p = self.presentation
        colors = {h: PALETTE[i % len(PALETTE)] for i, h in enumerate(p.generators)}
        label = {g: _vertex_label(self.site_to_json(g)) for g in self.vertices}
        lines = [f"digraph {name} {{"]
        for g in self.vertices:
            lines.append(f'  "{label[g]}";')
        drawn = set()
        for g, y, h in self.edges:
            if p.self_inverse(h):
                key = (h, frozenset((g, y)))
                if key in drawn:
                    continue
                drawn.add(key)
                lines.append(f'  "{label[g]}" -> "{label[y]}" [color={colors[h]}, label="{h}", dir=none];')
            else:
                lines.append(f'  "{label[g]}" -> "{label[y]}" [color={colors[h]}, label="{h}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def describe(self):
        return {
            "presentation": self.presentation.to_json(),
            "window_radius": self.window_radius,
            "num_vertices": len(self.vertices),
            "num_edges": len(self.edges),
            "num_boundary": len(self.vertices) - len(self.interior),
        }


def _vertex_label(obj):
    if isinstance(obj, list):
        return ",".join(map(str, obj))
    return str(obj)


def build_graph(p: Presentation, window_radius: int | None = None) -> CayleyGraph:
    if p.model.finite:
        window_radius = None
    return CayleyGraph(p, window_radius)


@dataclass(frozen=True, eq=False)
class NeighborhoodScheme:
    """N+_g = {g h : h in plus_offsets}; N-_f = {h : f in N+_h}."""

    graph: CayleyGraph
    plus_offsets: tuple

    def __post_init__(self):
        offs = tuple(
            self.graph.presentation.word(w) if isinstance(w, str) else w for w in self.plus_offsets
        )
        object.__setattr__(self, "plus_offsets", offs)

    @cached_property
    def _offset_elements(self):
        m = self.graph.model
        out = []
        for w in self.plus_offsets:
            try:
                out.append(evaluate(w, m))
            except WindowExceeded as exc:
                raise ClippingError(str(exc)) from None
        return out

    def _apply(self, g, x):
        try:
            y = self.graph.model.multiply(g, x)
        except WindowExceeded as exc:
            raise ClippingError(str(exc)) from None
        if y not in self.graph:
            raise ClippingError(
                f"neighborhood of {g!r} leaves the window of radius {self.graph.window_radius}"
            )
        return y

    def plus(self, g):
        """Ordered list g·h over the offsets (may repeat on small quotients)."""
        return [self._apply(g, x) for x in self._offset_elements]

    def minus(self, f):
        inv = self.graph.model.invert
        return [self._apply(f, inv(x)) for x in self._offset_elements]

    def neighborhood(self, region, direction="+"):
        fn = self.plus if direction in ("+", "fwd", "forward") else self.minus
        out = set()
        for g in region:
            out.update(fn(g))
        return frozenset(out)

    def present(self, region, direction="+"):
        """P+_R = N-(N+_R) and P-_R = N+(N-_R)."""
        other = "-" if direction in ("+", "fwd", "forward") else "+"
        return self.neighborhood(self.neighborhood(region, direction), other)

    @property
    def max_offset_length(self):
        return max((len(w) for w in self.plus_offsets), default=0)


def neighborhood(scheme: NeighborhoodScheme, region, direction="+"):
    return scheme.neighborhood(region, direction)


def graph_distance(graph: CayleyGraph, g, h):
    return graph.distance(g, h)


def translate(graph: CayleyGraph, region, w):
    return graph.translate(region, w)


def region_report(graph: CayleyGraph, region, **extra):
    out = {"sites": [graph.site_to_json(g) for g in graph.sort_sites(region)]}
    out.update(extra)
    return out
