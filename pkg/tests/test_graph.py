from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blowup.errors import ContractViolation, UndefinedDensity
from blowup.graph import (
    HOST,
    BipartitePair,
    Graph,
    VertexSet,
    bfs_distances,
    codegree,
    degree_into,
    density,
    subpair_density,
)
from oracles import distances


@st.composite
def graphs(draw, max_order=24):
    n = draw(st.integers(1, max_order))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, edges)


def test_vertex_set_algebra_matches_python_sets():
    a = VertexSet.of(HOST, 10, [1, 3, 5, 7])
    b = VertexSet.of(HOST, 10, [3, 4, 5])
    assert (a & b).to_list() == [3, 5]
    assert (a | b).to_list() == [1, 3, 4, 5, 7]
    assert (a - b).to_list() == [1, 7]
    assert len(VertexSet.full(HOST, 10)) == 10
    assert VertexSet.from_mask(HOST, a.mask()) == a


def test_mixing_universes_is_a_contract_violation():
    with pytest.raises(ContractViolation):
        VertexSet.of(HOST, 5, [1]) & VertexSet.of("pattern", 5, [1])
    with pytest.raises(ContractViolation):
        VertexSet.of(HOST, 5, [7])


def test_graph_rejects_loops_and_asymmetry():
    with pytest.raises(ContractViolation):
        Graph(np.eye(3, dtype=bool))
    m = np.zeros((3, 3), dtype=bool)
    m[0, 1] = True
    with pytest.raises(ContractViolation):
        Graph(m)


def test_graph_is_read_only():
    g = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(ValueError):
        g.matrix[0, 2] = True


@settings(max_examples=60, deadline=None)
@given(graphs(), st.data())
def test_degree_and_codegree_count_members(g, data):
    members = data.draw(st.lists(st.integers(0, g.order - 1), unique=True))
    s = VertexSet.of(HOST, g.order, members)
    u = data.draw(st.integers(0, g.order - 1))
    v = data.draw(st.integers(0, g.order - 1))
    assert degree_into(g, u, s) == sum(1 for w in members if g.has_edge(u, w))
    assert codegree(g, u, v, s) == sum(1 for w in members if g.has_edge(u, w) and g.has_edge(v, w))


@settings(max_examples=60, deadline=None)
@given(graphs(), st.data())
def test_bfs_matches_reference(g, data):
    adj = [g.neighbor_list(v) for v in range(g.order)]
    src = data.draw(st.integers(0, g.order - 1))
    limit = data.draw(st.one_of(st.none(), st.integers(0, 4)))
    ref = distances(adj, src)
    got = bfs_distances(adj, [src], limit=limit)
    expect = {v: d for v, d in ref.items() if limit is None or d <= limit}
    assert got == expect


def test_density_is_exact():
    p = BipartitePair(np.array([[1, 0, 1], [1, 1, 1]], dtype=bool))
    assert density(p) == Fraction(5, 6)
    assert subpair_density(p, [0], [0, 1]) == Fraction(1, 2)
    assert density(p.transpose()) == density(p)
    with pytest.raises(UndefinedDensity):
        density(BipartitePair(np.zeros((0, 3), dtype=bool)))


def test_pair_from_graph_requires_disjoint_sides():
    g = Graph.from_edges(4, [(0, 2), (1, 3)])
    a = VertexSet.of(HOST, 4, [0, 1])
    b = VertexSet.of(HOST, 4, [2, 3])
    assert BipartitePair.from_graph(g, a, b).num_edges() == 2
    with pytest.raises(ContractViolation):
        BipartitePair.from_graph(g, a, a)
