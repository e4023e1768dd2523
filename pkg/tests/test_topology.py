import numpy as np
import pytest

import burstlab as bl
from burstlab.topology import serialize


def test_ring_7_4():
    t = bl.regular_ring(7, 4)
    assert t.n == 7 and len(t.edges) == 14
    assert all(t.degree(i) == 4 for i in range(7))
    assert t.neighbors(6) == (0, 1, 4, 5)


def test_ring_triangle_and_complete():
    tri = bl.regular_ring(3, 2)
    assert len(tri.edges) == 3 and all(tri.degree(i) == 2 for i in range(3))
    k7 = bl.regular_ring(7, 6)
    assert len(k7.edges) == 21  # complete graph


@pytest.mark.parametrize("n,k", [(7, 3), (7, 7), (2, 2), (6, 0)])
def test_ring_invalid_parameters(n, k):
    with pytest.raises(bl.InvalidParameterError):
        bl.regular_ring(n, k)


def test_topology_rejects_self_loop_duplicate_range():
    with pytest.raises(bl.InvalidParameterError):
        bl.Topology(3, ((0, 0),))
    with pytest.raises(bl.InvalidParameterError):
        bl.Topology(3, ((0, 1), (1, 0)))
    with pytest.raises(bl.InvalidParameterError):
        bl.Topology(3, ((0, 5),))


def test_ws_zero_probability_is_ring():
    ring = bl.regular_ring(9, 4)
    for seed in (0, 1, 17):
        assert bl.watts_strogatz(9, 4, 0.0, seed).edges == ring.edges


def test_ws_preserves_edge_count_and_connectivity():
    for seed in range(30):
        t = bl.watts_strogatz(12, 4, 0.5, seed)
        assert len(t.edges) == 12 * 4 // 2
        assert bl.is_connected(t)
        assert sum(t.degree(i) for i in range(t.n)) == 2 * len(t.edges)


def test_ws_deterministic_and_seed_recorded():
    a = bl.watts_strogatz(7, 4, 0.5, 42)
    b = bl.watts_strogatz(7, 4, 0.5, 42)
    assert a.edges == b.edges
    assert a.seed_used is not None and a.seed_used >= 42


def test_ws_rewires_with_p_one():
    # p=1 visits every edge; result differs from the ring for most seeds
    ring = bl.regular_ring(20, 4)
    changed = sum(bl.watts_strogatz(20, 4, 1.0, s).edges != ring.edges
                  for s in range(5))
    assert changed == 5


def test_ws_invalid_probability():
    with pytest.raises(bl.InvalidParameterError):
        bl.watts_strogatz(7, 4, 1.5, 0)


def test_load_edge_list_triangle():
    t = bl.load_edge_list("0 1\n1 2\n2 0\n")
    assert t.n == 3 and all(t.degree(i) == 2 for i in range(3))


def test_load_edge_list_comments_and_whitespace():
    t = bl.load_edge_list("# a triangle\n0 1\n\n1 2  # second edge\n2 0\n")
    assert len(t.edges) == 3


@pytest.mark.parametrize("text,line", [
    ("0 0\n", 1),
    ("0 1\n0 1\n", 2),
    ("0 1\n1 2\n2 zzz\n", 3),
    ("0 1 2\n", 1),
])
def test_load_edge_list_errors_carry_line(text, line):
    with pytest.raises(bl.EdgeListError) as err:
        bl.load_edge_list(text)
    assert err.value.line == line


def test_load_edge_list_rejects_disconnected():
    with pytest.raises(bl.EdgeListError):
        bl.load_edge_list("0 1\n2 3\n")


def test_serialize_round_trip():
    for topo in (bl.regular_ring(7, 4), bl.watts_strogatz(9, 4, 0.5, 3)):
        assert bl.load_edge_list(serialize(topo)).edges == topo.edges


def test_ring_edge_list_round_trip_matches_generator():
    text = serialize(bl.regular_ring(7, 4))
    assert bl.load_edge_list(text).edges == bl.regular_ring(7, 4).edges


def test_degree_function_and_bounds():
    t = bl.regular_ring(7, 4)
    assert bl.degree(t, 0) == 4
    with pytest.raises(bl.InvalidParameterError):
        bl.degree(t, 7)


def test_neighbor_arrays_consistent():
    t = bl.watts_strogatz(11, 4, 0.5, 5)
    indptr, indices = t.neighbor_arrays()
    for i in range(t.n):
        assert tuple(indices[indptr[i]:indptr[i + 1]]) == t.neighbors(i)


def test_empty_topology_for_uncoupled_runs():
    t = bl.Topology.empty(5)
    assert t.n == 5 and t.edges == ()
    assert not bl.is_connected(t)


def test_content_hash_distinguishes_graphs():
    a = bl.regular_ring(7, 4)
    b = bl.watts_strogatz(7, 4, 0.5, 1)
    assert a.content_hash() != b.content_hash()
    assert a.content_hash() == bl.regular_ring(7, 4).content_hash()
