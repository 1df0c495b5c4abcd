import pytest
from hypothesis import given
from hypothesis import strategies as st

from opca.cayley import ClippingError, NeighborhoodScheme, build_graph
from opca.group_engine import cyclic_presentation, free_abelian_presentation, free_group_presentation

import oracles


TORUS = build_graph(cyclic_presentation(6, 5))
sites = st.sampled_from(TORUS.vertices)


def test_sizes():
    assert len(TORUS) == 30
    assert len(TORUS.edges) == 60
    assert len(build_graph(free_abelian_presentation(2), window_radius=3)) == len(oracles.lattice_ball(2, 3))
    # free group on two generators: 1 + 4 + 12 + 36 words of length <= 3
    assert len(build_graph(free_group_presentation(("a", "b"), 5), window_radius=3)) == 53


@given(sites, sites)
def test_distance_matches_torus_metric(x, y):
    assert TORUS.distance(x, y) == oracles.torus_distance(x, y, (6, 5))


@given(sites, sites, sites)
def test_left_translation_is_an_isometry(x, y, z):
    w = TORUS.word_of(z)
    assert TORUS.distance(TORUS.left(w, x), TORUS.left(w, y)) == TORUS.distance(x, y)


def test_words_reach_their_vertex():
    for g in TORUS.vertices:
        w = TORUS.word_of(g)
        assert TORUS.mul(TORUS.identity, w) == g
        assert len(w) == TORUS.distance(TORUS.identity, g)


def test_neighbors_follow_declared_order():
    labels = [str(s) for s, _ in TORUS.neighbors((0, 0))]
    assert labels == ["a", "a^-1", "b", "b^-1"]


def test_window_clipping():
    g = build_graph(free_abelian_presentation(1), window_radius=4)
    assert g.interior == frozenset(v for v in g.vertices if abs(v[0]) < 4)
    with pytest.raises(ClippingError):
        g.mul((4,), "a")


def test_scheme_neighborhoods():
    scheme = NeighborhoodScheme(TORUS, ("ba^-1", "b", "ba"))
    assert set(scheme.plus((0, 0))) == {(5, 1), (0, 1), (1, 1)}
    assert set(scheme.minus((0, 0))) == {(1, 4), (0, 4), (5, 4)}
    assert scheme.max_offset_length == 2
    # f in N+_g iff g in N-_f
    for g in TORUS.vertices:
        for f in scheme.plus(g):
            assert g in scheme.minus(f)


def test_dot_marks_self_inverse_edges():
    dot = build_graph(cyclic_presentation(2, 3)).to_dot()
    assert "dir=none" in dot
    assert dot.count("label=\"a\"") == 3  # one undirected a-edge per pair
    assert dot.count("label=\"b\"") == 6


def test_parse_site():
    assert TORUS.parse_site("2,1") == (2, 1)
    assert TORUS.parse_site("-1,0") == (5, 0)
    assert TORUS.parse_site("ab^2") == (1, 2)
    with pytest.raises(ValueError):
        TORUS.parse_site("a?")
