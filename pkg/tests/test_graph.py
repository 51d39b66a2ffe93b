import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bipramsey.graph import (GraphError, Selection, VertexPack, X, Y, build_graph, complete_bipartite,
                             density, empty_bipartite, induced_edge_count, pack_degree_into,
                             pack_symdiff_size, parse_graph, random_bipartite, random_bipartite_exact_edges,
                             read_graph, relabel, serialize_graph, shuffled, sub_seed, write_graph,
                             BipartiteGraph)


@st.composite
def graphs(draw, max_side=8):
    xs = draw(st.integers(1, max_side))
    ys = draw(st.integers(1, max_side))
    cells = draw(st.lists(st.booleans(), min_size=xs * ys, max_size=xs * ys))
    return BipartiteGraph.from_array(np.array(cells, dtype=bool).reshape(xs, ys))


@st.composite
def graph_and_selection(draw):
    g = draw(graphs())
    xm = draw(st.integers(0, (1 << g.x_size) - 1))
    ym = draw(st.integers(0, (1 << g.y_size) - 1))
    return g, Selection(xm, ym)


@pytest.mark.parametrize("xs,ys,edges,count", [
    (1, 1, [(0, 0)], 1),
    (2, 2, [], 0),
    (2, 3, [(i, j) for i in range(2) for j in range(3)], 6),
])
def test_build_graph_counts(xs, ys, edges, count):
    g = build_graph(xs, ys, edges)
    assert g.edge_count == count
    assert sorted(g.edges()) == sorted(edges)


def test_build_graph_complete_matches_constructor():
    assert build_graph(2, 3, [(i, j) for i in range(2) for j in range(3)]) == complete_bipartite(2, 3)


@pytest.mark.parametrize("edges", [[(0, 5)], [(2, 0)], [(-1, 0)], [(0, 0), (0, 0)]])
def test_build_graph_rejects_bad_edges(edges):
    with pytest.raises(GraphError):
        build_graph(2, 2, edges)


@pytest.mark.parametrize("g,expected", [
    (complete_bipartite(2, 3), Fraction(1)),
    (empty_bipartite(4, 4), Fraction(0)),
    (build_graph(3, 3, [(0, 0), (1, 1), (2, 2), (0, 2)]), Fraction(4, 9)),
])
def test_density(g, expected):
    assert density(g) == expected


def test_density_empty_side():
    with pytest.raises(GraphError):
        density(empty_bipartite(0, 3))


def test_induced_edge_count_examples():
    assert induced_edge_count(complete_bipartite(2, 2), Selection(0b11, 0b11)) == 4
    assert induced_edge_count(complete_bipartite(2, 3), Selection.of([0], [0, 2])) == 2
    with pytest.raises(GraphError):
        induced_edge_count(complete_bipartite(2, 2), Selection(0b100, 0))


@given(graph_and_selection())
def test_induced_count_matches_matrix(gs):
    g, sel = gs
    a = g.to_array().astype(int)
    xi = [i for i in range(g.x_size) if sel.x_mask >> i & 1]
    yi = [j for j in range(g.y_size) if sel.y_mask >> j & 1]
    assert induced_edge_count(g, sel) == int(a[np.ix_(xi, yi)].sum())


@given(graphs())
def test_full_and_empty_selection(g):
    assert induced_edge_count(g, Selection.full(g)) == g.edge_count
    assert induced_edge_count(g, Selection.empty()) == 0


@given(graph_and_selection(), st.integers(0, 7), st.booleans())
def test_induced_count_monotone(gs, v, on_x):
    g, sel = gs
    side = g.x_size if on_x else g.y_size
    v %= side
    bigger = Selection(sel.x_mask | (1 << v), sel.y_mask) if on_x else Selection(sel.x_mask, sel.y_mask | (1 << v))
    assert induced_edge_count(g, bigger) >= induced_edge_count(g, sel)


def test_pack_degree_examples():
    k = complete_bipartite(2, 2)
    full = Selection.full(k)
    assert pack_degree_into(k, VertexPack.of(X, 0), full) == 2
    assert pack_degree_into(k, VertexPack.of(Y, 0, 1), full) == 4
    g = build_graph(3, 2, [(i, j) for i in range(3) for j in range(2)])
    assert pack_degree_into(g, VertexPack.of(Y, 0, 1), Selection.full(g)) == 6


@given(graphs())
def test_pack_degree_full_is_degree_sum(g):
    full = Selection.full(g)
    for a, b in itertools.combinations(range(g.y_size), 2):
        assert pack_degree_into(g, VertexPack.of(Y, a, b), full) == sum(g.y_degrees()[i] for i in (a, b))


def _multiset(g, pack, within):
    c = Counter()
    for i in pack.indices:
        for x in range(g.x_size):
            if g.has_edge(x, i) and within >> x & 1:
                c[x] += 1
    return c


def _multiset_symdiff_oracle(g, a, b, within):
    ca, cb = _multiset(g, a, within), _multiset(g, b, within)
    return sum(abs(ca[k] - cb[k]) for k in set(ca) | set(cb))


def test_pack_symdiff_examples():
    g = build_graph(5, 2, [(0, 0), (1, 0), (2, 1), (3, 1), (4, 1)])
    assert pack_symdiff_size(g, VertexPack.of(Y, 0), VertexPack.of(Y, 1)) == 5
    h = build_graph(2, 2, [(0, 0), (1, 0), (0, 1), (1, 1)])
    assert pack_symdiff_size(h, VertexPack.of(Y, 0), VertexPack.of(Y, 1)) == 0
    with pytest.raises(GraphError):
        pack_symdiff_size(h, VertexPack.of(Y, 0, 1), VertexPack.of(Y, 1))


@given(graphs(max_side=8), st.data())
def test_pack_symdiff_matches_multiset_oracle(g, data):
    if g.y_size < 4:
        return
    idx = data.draw(st.permutations(range(g.y_size)))
    a = VertexPack.of(Y, idx[0], idx[1])
    b = VertexPack.of(Y, *idx[2:data.draw(st.integers(3, 4))])
    within = data.draw(st.integers(0, (1 << g.x_size) - 1))
    sel = Selection(within, 0)
    assert pack_symdiff_size(g, a, b, sel) == _multiset_symdiff_oracle(g, a, b, within)
    assert pack_symdiff_size(g, a, b, sel) == pack_symdiff_size(g, b, a, sel)
    assert pack_symdiff_size(g, a, a, sel) == 0


@given(graphs(max_side=7), st.data())
def test_pack_symdiff_triangle(g, data):
    if g.y_size < 3:
        return
    a, b, c = (VertexPack.of(Y, i) for i in data.draw(st.permutations(range(g.y_size)))[:3])
    d = lambda u, v: pack_symdiff_size(g, u, v)
    assert d(a, c) <= d(a, b) + d(b, c)


def test_pack_validation():
    with pytest.raises(GraphError):
        VertexPack.of(Y, 1, 1)
    with pytest.raises(GraphError):
        VertexPack.of(Y)


def test_random_bipartite_extremes_and_determinism():
    assert random_bipartite(5, 7, 0.0, 1) == empty_bipartite(5, 7)
    assert random_bipartite(5, 7, 1.0, 1) == complete_bipartite(5, 7)
    assert random_bipartite(9, 9, 0.5, 42) == random_bipartite(9, 9, 0.5, 42)
    with pytest.raises(GraphError):
        random_bipartite(2, 2, 1.5, 0)


def test_random_bipartite_concentration():
    counts = [random_bipartite(64, 64, 0.5, sub_seed(1, s)).edge_count for s in range(1000)]
    inside = sum(1843 <= c <= 2253 for c in counts)
    assert inside >= 990


def test_exact_edges_uniform():
    freq = np.zeros((3, 3))
    for s in range(10_000):
        g = random_bipartite_exact_edges(3, 3, 4, s)
        assert g.edge_count == 4
        freq += g.to_array()
    assert np.all(np.abs(freq / 10_000 - 4 / 9) < 0.02)


def test_exact_edges_extremes():
    assert random_bipartite_exact_edges(3, 4, 12, 0) == complete_bipartite(3, 4)
    assert random_bipartite_exact_edges(3, 4, 0, 0) == empty_bipartite(3, 4)
    with pytest.raises(GraphError):
        random_bipartite_exact_edges(2, 2, 5, 0)


def test_serialize_k11():
    assert serialize_graph(complete_bipartite(1, 1)) == "bipartite v1\nx 1\ny 1\ne 1\n0 0\n"


@pytest.mark.parametrize("text", [
    "bipartite v1\nx 2\ny 2\ne 1\n0 5",
    "bipartite v2\nx 2\ny 2\ne 0\n",
    "bipartite v1\nx 2\ny 2\ne 2\n0 0\n",
    "bipartite v1\nx 2\ny 2\ne 2\n0 0\n0 0",
    "bipartite v1\nx two\ny 2\ne 0",
    "bipartite v1\nx 2\ny 2\ne 1\n0",
])
def test_parse_rejects(text):
    with pytest.raises(GraphError):
        parse_graph(text)


def test_round_trip_random(tmp_path):
    for s in range(100):
        rng = np.random.default_rng(s)
        g = random_bipartite(int(rng.integers(1, 12)), int(rng.integers(1, 12)), float(rng.random()), s)
        assert parse_graph(serialize_graph(g)) == g
    path = tmp_path / "g.txt"
    write_graph(g, path)
    assert read_graph(path) == g
    assert serialize_graph(read_graph(path)) == path.read_text()


def test_transpose_flag():
    g = random_bipartite(3, 5, 0.5, 4)
    t = g.transpose()
    assert t.transposed and not g.transposed
    assert (t.x_size, t.y_size) == (5, 3)
    assert t.transpose() == g
    assert np.array_equal(t.to_array(), g.to_array().T)
    assert g.oriented() is g and random_bipartite(6, 2, 0.5, 1).oriented().transposed


def test_relabel_preserves_degrees():
    g = random_bipartite(6, 7, 0.4, 3)
    h = shuffled(g, 9)
    assert sorted(g.x_degrees()) == sorted(h.x_degrees())
    assert relabel(g, list(range(6)), list(range(7))) == g


def test_sub_seed_stable_and_distinct():
    assert sub_seed(5, 1, 2) == sub_seed(5, 1, 2)
    seeds = {sub_seed(5, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert sub_seed(5, 1) != sub_seed(6, 1)
