import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from almostpartite.graph import (
    UNREACHABLE,
    Graph,
    ball,
    complete_bipartite_graph,
    complete_graph,
    components,
    cycle_graph,
    disjoint_union,
    distance,
    empty_graph,
    induced_subgraph,
    path_graph,
    relabel,
    set_distance,
)
from conftest import graphs, to_nx


def test_rejects_loops_and_out_of_range():
    with pytest.raises(ValueError):
        Graph(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph(3, [(1, 4)])


def test_induced_subgraph_examples():
    h, labels = induced_subgraph(complete_graph(3), [1, 2])
    assert h.n == 2 and h.edges() == [(1, 2)] and labels == (1, 2)
    h, labels = induced_subgraph(cycle_graph(5), [1, 3])
    assert h.n == 2 and h.num_edges() == 0 and labels == (1, 3)


@given(graphs())
def test_induced_on_everything_is_identity(g):
    h, labels = induced_subgraph(g, range(1, g.n + 1))
    assert h == g and labels == tuple(range(1, g.n + 1))


def test_distance_examples():
    c5 = cycle_graph(5)
    assert distance(c5, 1, 2) == 1
    assert distance(c5, 1, 3) == 2
    g = disjoint_union(path_graph(2), path_graph(2))
    assert distance(g, 1, 3) is UNREACHABLE
    with pytest.raises(ValueError):
        set_distance(c5, [], [1])


def test_ball_examples():
    c5 = cycle_graph(5)
    assert ball(c5, [1], 0) == (1,)
    assert ball(c5, [1], 1) == (1, 2, 5)
    assert ball(c5, [1], 3) == (1, 2, 3, 4, 5)


@settings(max_examples=60)
@given(graphs(min_n=1), st.data())
def test_distance_matches_networkx(g, data):
    u = data.draw(st.integers(1, g.n))
    v = data.draw(st.integers(1, g.n))
    ref = to_nx(g)
    d = distance(g, u, v)
    if nx.has_path(ref, u, v):
        assert d == nx.shortest_path_length(ref, u, v)
    else:
        assert d is UNREACHABLE


@given(graphs())
def test_components_match_networkx(g):
    ours = {frozenset(c) for c in components(g)}
    ref = {frozenset(c) for c in nx.connected_components(to_nx(g))}
    assert ours == ref


@given(graphs(), st.randoms())
def test_relabel_preserves_degree_sequence(g, rnd):
    perm = list(range(1, g.n + 1))
    rnd.shuffle(perm)
    h = relabel(g, perm)
    assert sorted(h.degrees()) == sorted(g.degrees())
    assert h.num_edges() == g.num_edges()


def test_constructors():
    assert complete_bipartite_graph(4, 4).num_edges() == 16
    assert empty_graph(5).num_edges() == 0
    assert complete_graph(5).max_degree() == 4
    assert path_graph(10).num_edges() == 9
