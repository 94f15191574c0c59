import itertools
import random

import numpy as np
import pytest

from arbsample.errors import InvalidGraphError
from arbsample.graphs import (Arborescence, WeightedDigraph, boundary_edges,
                              check_walkable, is_eulerian,
                              is_strongly_connected, reverse_graph,
                              validate_arborescence, weight_floor_connected,
                              weighted_out_degree)
from arbsample.oracle import enumerate_arborescences
from arbsample.walks import stationary_distribution, transition_matrix

from conftest import advance_reset, barbell, c3, k3, random_eulerian, \
    random_strongly_connected


def test_out_degree_examples():
    assert weighted_out_degree(c3(), 0) == 1.0
    assert weighted_out_degree(barbell(1000), 1) == 1001.0
    g = WeightedDigraph(2, [(0, 1, 2), (0, 1, 3)])
    assert weighted_out_degree(g, 0) == 5.0


def test_construction_rejects_bad_edges():
    with pytest.raises(InvalidGraphError):
        WeightedDigraph(2, [(0, 2, 1)])
    with pytest.raises(InvalidGraphError):
        WeightedDigraph(2, [(0, 1, 0)])
    with pytest.raises(InvalidGraphError):
        WeightedDigraph(2, [(0, 1, -3)])
    with pytest.raises(InvalidGraphError):
        WeightedDigraph(0, [])


def test_boundary_edges_examples():
    g = c3()
    assert boundary_edges(g, {0, 1}, "outgoing") == [1]      # 1->2
    assert boundary_edges(g, {0, 1, 2}, "outgoing") == []
    f = advance_reset(4)
    incoming = boundary_edges(f, {0, 1}, "incoming")
    pairs = {(int(f.src[e]), int(f.dst[e])) for e in incoming}
    assert pairs == {(2, 0), (3, 0)}


def test_boundary_direction_duality():
    rng = random.Random(5)
    for _ in range(20):
        g = random_strongly_connected(rng, 6)
        rev = reverse_graph(g)
        s = frozenset(rng.sample(range(6), rng.randint(1, 5)))
        assert sorted(boundary_edges(g, s, "outgoing")) == \
            sorted(boundary_edges(rev, s, "incoming"))


def test_is_eulerian_examples():
    assert is_eulerian(c3())
    assert not is_eulerian(advance_reset(4))
    assert is_eulerian(k3())


def test_strong_connectivity_and_weight_floor():
    g = c3()
    assert is_strongly_connected(g)
    assert weight_floor_connected(g, {0, 1, 2}, 1.0)
    assert not weight_floor_connected(g, {0, 1, 2}, 1.5)
    b = barbell(1000)
    assert weight_floor_connected(b, {0, 1}, 1000 / 4)
    assert not weight_floor_connected(b, {0, 1, 2}, 1000 / 4)
    broken = WeightedDigraph(2, [(0, 1, 1), (1, 1, 1)])
    assert not is_strongly_connected(broken)


def test_reverse_graph():
    g = c3()
    rev = reverse_graph(g)
    assert rev.edge_tuples() == [(1, 0, 1.0), (2, 1, 1.0), (0, 2, 1.0)]
    assert reverse_graph(rev) == g
    assert sorted((u, v) for u, v, _ in reverse_graph(k3()).edge_tuples()) == \
        sorted((u, v) for u, v, _ in k3().edge_tuples())
    f = advance_reset(4)
    flipped = {(int(f.dst[e]), int(f.src[e])) for e in range(f.m)}
    assert flipped == {(u, v) for u, v, _ in reverse_graph(f).edge_tuples()}


def test_time_reversal_transition_identity():
    """On Eulerian graphs the edge flip realizes the time reversal: the flipped
    walk's transition v->u equals pi(u) P(u,v) / pi(v)."""
    rng = random.Random(11)
    for _ in range(10):
        g = random_eulerian(rng, rng.randint(3, 8))
        assert is_eulerian(g)
        pi = stationary_distribution(g)
        p = transition_matrix(g)
        p_rev = transition_matrix(reverse_graph(g))
        for e in range(g.m):
            u, v = int(g.src[e]), int(g.dst[e])
            expected = pi[u] * p[u, v] / pi[v]
            assert p_rev[v, u] == pytest.approx(expected, rel=1e-9)


def test_validate_arborescence_examples():
    g = c3()
    good = Arborescence(root=0, parent_edge={1: 1, 2: 2})   # 1->2, 2->0
    assert validate_arborescence(g, good)
    assert not validate_arborescence(g, Arborescence(root=0, parent_edge={1: 1}))
    t = k3()
    star = Arborescence(root=0, parent_edge={1: 1, 2: 3})   # 1->0, 2->0
    assert validate_arborescence(t, star)
    cycle = Arborescence(root=0, parent_edge={1: 4, 2: 5})  # 1->2, 2->1
    assert not validate_arborescence(t, cycle)
    wrong_src = Arborescence(root=0, parent_edge={1: 0, 2: 3})
    assert not validate_arborescence(t, wrong_src)


def test_validate_matches_enumeration():
    """validate_arborescence accepts exactly the trees the brute-force oracle finds."""
    rng = random.Random(77)
    for _ in range(15):
        g = random_strongly_connected(rng, rng.randint(2, 5))
        root = rng.randrange(g.n)
        catalog = enumerate_arborescences(g, root)
        accepted = set()
        nonroot = [v for v in range(g.n) if v != root]
        for choice in itertools.product(*[g.out_edges[v] for v in nonroot]):
            tree = Arborescence(root=root, parent_edge=dict(zip(nonroot, choice)))
            if validate_arborescence(g, tree):
                accepted.add(tree.key())
        assert accepted == {t.key() for t, _ in catalog.entries}


def test_sink_rejection():
    with pytest.raises(InvalidGraphError):
        check_walkable(WeightedDigraph(2, [(0, 1, 1)]))
    check_walkable(c3())
