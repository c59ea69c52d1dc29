import pytest

from lpvsync.errors import (NodeIndexError, NotWeaklyConnectedError,
                            SelfLoopError)
from lpvsync.graph import (DiGraph, build_graph, is_weakly_connected,
                           ring_graph)


def test_build_graph_degrees_and_neighbors():
    g = build_graph(3, [(0, 1), (1, 2), (2, 0), (0, 2)])
    assert g.node_count == 3
    assert g.in_neighbors[1] == (0,)
    assert set(g.in_neighbors[2]) == {0, 1}
    assert list(g.in_degree) == [1, 1, 2]
    assert list(g.out_degree) == [2, 1, 1]


def test_build_graph_rejects_self_loop():
    with pytest.raises(SelfLoopError):
        build_graph(2, [(0, 0)])


def test_build_graph_rejects_bad_node_index():
    with pytest.raises(NodeIndexError):
        build_graph(2, [(0, 2)])
    with pytest.raises(NodeIndexError):
        build_graph(2, [(-1, 0)])


def test_build_graph_rejects_duplicate_edge():
    with pytest.raises(ValueError):
        build_graph(3, [(0, 1), (0, 1)])


def test_ring_graph_listens_to_predecessor():
    g = ring_graph(5)
    for i in range(5):
        assert g.in_neighbors[i] == ((i - 1) % 5,)


def test_weak_connectivity():
    assert is_weakly_connected(ring_graph(4))
    g = DiGraph(node_count=4, edges=frozenset({(0, 1), (2, 3)}))
    assert not is_weakly_connected(g)
