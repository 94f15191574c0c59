import random

import numpy as np
import pytest

from arbsample.errors import (SingularSystemError, TrappedClusterError,
                              ZeroConditioningError)
from arbsample.graphs import WeightedDigraph, is_eulerian, reverse_graph
from arbsample.walks import (conditioned_exit_table, exit_distribution,
                             schur_complement, stationary_distribution,
                             visit_count)

from conftest import advance_reset, barbell, c3, k3, random_eulerian, \
    random_strongly_connected, two_state_loop
from oracles import mc_conditional_child_exit, mc_exit_edges, tv_distance


def test_stationary_examples():
    assert stationary_distribution(c3()) == pytest.approx([1 / 3] * 3)
    pi = stationary_distribution(barbell(1000))
    assert pi == pytest.approx(np.array([1000, 1001, 1]) / 2002, rel=1e-9)
    assert stationary_distribution(two_state_loop()) == pytest.approx([1 / 3, 2 / 3])


def test_stationary_rejects_disconnected():
    g = WeightedDigraph(2, [(0, 1, 1), (1, 1, 1)])
    with pytest.raises(SingularSystemError):
        stationary_distribution(g)


def test_eulerian_stationary_proportional_to_degree():
    rng = random.Random(3)
    for _ in range(10):
        g = random_eulerian(rng, rng.randint(3, 10))
        pi = stationary_distribution(g)
        expected = g.out_weight / g.out_weight.sum()
        assert pi == pytest.approx(expected, abs=1e-9)


def test_exit_distribution_examples():
    dist = exit_distribution(c3(), {0, 1}, 0)
    assert dist == {1: pytest.approx(1.0)}
    g = WeightedDigraph(3, [(0, 1, 2), (0, 2, 3), (1, 0, 1), (2, 0, 1)])
    dist = exit_distribution(g, {0}, 0)
    assert dist[0] == pytest.approx(0.4)
    assert dist[1] == pytest.approx(0.6)


def test_exit_distribution_advance_reset():
    """S={1,2} of the advance-or-reset graph: exits 1->0, 2->0, 2->3 carry
    exactly 1/2, 1/4, 1/4 from start 1 (first-step decomposition by hand)."""
    g = advance_reset(4)
    dist = exit_distribution(g, {1, 2}, 1)
    by_pair = {(int(g.src[e]), int(g.dst[e])): p for e, p in dist.items()}
    assert by_pair[(1, 0)] == pytest.approx(0.5)
    assert by_pair[(2, 0)] == pytest.approx(0.25)
    assert by_pair[(2, 3)] == pytest.approx(0.25)
    mc = mc_exit_edges(g, {1, 2}, 1, trials=200_000, seed=4)
    assert tv_distance(mc, dist) < 0.01


def test_exit_distribution_sums_to_one():
    rng = random.Random(9)
    for _ in range(20):
        g = random_strongly_connected(rng, 6)
        size = rng.randint(1, 5)
        subset = frozenset(rng.sample(range(6), size))
        for v in subset:
            dist = exit_distribution(g, subset, v)
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)


def test_trapped_cluster():
    g = WeightedDigraph(3, [(0, 0, 1), (0, 1, 1), (1, 0, 1), (2, 2, 1)])
    with pytest.raises(TrappedClusterError):
        exit_distribution(g, {2}, 2)       # no outgoing boundary at all
    h = WeightedDigraph(3, [(0, 1, 1), (1, 0, 1), (1, 2, 1), (2, 2, 1)])
    with pytest.raises(TrappedClusterError):
        exit_distribution(h, {1, 2}, 1)    # 2 can only self-loop


def test_conditioned_table_sure_event_matches_unconditioned():
    g = barbell(50)
    only_exit = [e for e in range(g.m) if (int(g.src[e]), int(g.dst[e])) == (1, 2)][0]
    table = conditioned_exit_table(g, {0, 1}, only_exit)
    plain = conditioned_exit_table(g, {0, 1}, None)
    for v in (0, 1):
        ids_c, probs_c = table.rows[v]
        ids_p, probs_p = plain.rows[v]
        assert list(ids_c) == list(ids_p)
        assert probs_c == pytest.approx(probs_p, abs=1e-12)
        assert table.h[v] == pytest.approx(1.0)


def test_conditioned_table_c3_deterministic():
    table = conditioned_exit_table(c3(), {0, 1, 2}, None)
    for v in range(3):
        ids, probs = table.rows[v]
        assert list(ids) == [v]           # edge v -> v+1 has id v
        assert probs == pytest.approx([1.0])


def test_conditioned_table_two_exit_redistribution():
    """Cluster {0,1} with exits 0->2 and 1->3, conditioned on leaving via 1->3.

    Hand solve: h(1)=2/3, h(0)=1/3; conditioning makes 0's stray exit
    impossible (q_0(0->1)=1) and tilts 1 toward its exit (3/4 vs 1/2).
    """
    g = WeightedDigraph(4, [(0, 1, 1), (1, 0, 1), (0, 2, 1), (1, 3, 1),
                            (2, 0, 1), (3, 0, 1)])
    e_end = 3   # edge (1, 3)
    table = conditioned_exit_table(g, {0, 1}, e_end)
    assert table.h[0] == pytest.approx(1 / 3)
    assert table.h[1] == pytest.approx(2 / 3)
    ids0, probs0 = table.rows[0]
    assert list(ids0) == [0] and probs0 == pytest.approx([1.0])
    ids1, probs1 = table.rows[1]
    law1 = dict(zip(ids1, probs1))
    assert law1[1] == pytest.approx(1 / 4)
    assert law1[3] == pytest.approx(3 / 4)


def test_conditioned_table_against_rejection_sampling():
    g = WeightedDigraph(4, [(0, 1, 1), (1, 0, 1), (0, 2, 1), (1, 3, 1),
                            (2, 0, 1), (3, 0, 1)])
    subset = frozenset({0, 1})
    cond, kept = mc_conditional_child_exit(g, subset, {0}, 0,
                                           trials=200_000, seed=8)
    for e_end, law in cond.items():
        table = conditioned_exit_table(g, subset, e_end)
        ids, probs = table.rows[0]
        assert tv_distance(law, dict(zip(ids, probs))) < 0.02


def test_conditioned_table_one_step_recurrence():
    """h is harmonic: h(v) = sum over child exits of p(f) * hstar(f)."""
    rng = random.Random(21)
    for _ in range(10):
        g = random_eulerian(rng, 6)
        subset = frozenset(rng.sample(range(6), 3))
        from arbsample.graphs import boundary_edges
        exits = boundary_edges(g, subset, "outgoing")
        e_end = rng.choice(exits)
        table = conditioned_exit_table(g, subset, e_end)
        for v in subset:
            plain = conditioned_exit_table(g, subset, None)
            ids, probs = plain.rows[v]
            acc = 0.0
            for e, p in zip(ids, probs):
                head = int(g.dst[e])
                if head in subset:
                    acc += p * table.h[head]
                elif e == e_end:
                    acc += p
            assert acc == pytest.approx(table.h[v], rel=1e-8)


def test_zero_conditioning():
    g = WeightedDigraph(4, [(0, 2, 1), (1, 0, 1), (1, 3, 1),
                            (2, 0, 1), (3, 1, 1)])
    e_end = 2   # edge (1, 3); unreachable from 0 inside {0,1}
    table = conditioned_exit_table(g, {0, 1}, e_end)
    assert table.rows[0] is None
    with pytest.raises(ZeroConditioningError):
        table.distribution(0)
    assert table.rows[1] is not None


def test_schur_c3():
    sc = schur_complement(c3(), {0, 1})
    got = {(int(sc.graph.src[i]), int(sc.graph.dst[i])): sc.graph.weight[i]
           for i in range(sc.graph.m)}
    assert got[(0, 1)] == pytest.approx(1.0)
    assert got[(1, 0)] == pytest.approx(1.0)   # detour through 2, probability 1
    assert is_eulerian(sc.graph)


def test_schur_k3_by_hand():
    sc = schur_complement(k3(), {0, 1})
    weights: dict = {}
    for i in range(sc.graph.m):
        key = (int(sc.graph.src[i]), int(sc.graph.dst[i]))
        weights.setdefault(key, []).append(round(float(sc.graph.weight[i]), 12))
    assert sorted(weights[(0, 1)]) == [0.5, 1.0]
    assert sorted(weights[(1, 0)]) == [0.5, 1.0]
    assert weights[(0, 0)] == [0.5]
    assert weights[(1, 1)] == [0.5]
    assert sc.graph.out_weight[0] == pytest.approx(2.0)   # degree preserved


def test_schur_full_set_is_identity():
    sc = schur_complement(k3(), {0, 1, 2})
    assert sc.graph == k3()
    assert all(sc.original_edge[i] == i for i in range(k3().m))


def test_schur_eulerian_and_degree_preservation():
    rng = random.Random(17)
    for _ in range(15):
        g = random_eulerian(rng, rng.randint(4, 12))
        size = rng.randint(2, g.n - 1)
        subset = sorted(rng.sample(range(g.n), size))
        sc = schur_complement(g, subset)
        assert is_eulerian(sc.graph, rel_tol=1e-9)
        for orig, new in sc.vertex_map.items():
            assert sc.graph.out_weight[new] == pytest.approx(
                g.out_weight[orig], rel=1e-9)


def test_schur_return_edges_match_simulation():
    """Return-edge weights equal deg(u) times the simulated probability of
    stepping out and re-entering the subset at each vertex."""
    from bisect import bisect_right

    g = random_eulerian(random.Random(23), 6)
    subset = frozenset({0, 1, 2})
    sc = schur_complement(g, sorted(subset))
    tables = []
    for v in range(g.n):
        es = g.out_edges[v]
        ws = np.cumsum([g.weight[e] for e in es])
        tables.append((es, list(ws / ws[-1])))
    rng = random.Random(5)

    def step(v):
        es, cum = tables[v]
        return int(g.dst[es[bisect_right(cum, rng.random())]])

    u, trials = 0, 100_000
    counts: dict = {}
    for _ in range(trials):
        cur = step(u)
        if cur in subset:
            continue
        while cur not in subset:
            cur = step(cur)
        counts[cur] = counts.get(cur, 0) + 1
    returns: dict = {}
    for i in range(sc.graph.m):
        if sc.original_edge[i] is None and int(sc.graph.src[i]) == sc.vertex_map[u]:
            v = sc.vertices[int(sc.graph.dst[i])]
            returns[v] = returns.get(v, 0.0) + float(sc.graph.weight[i])
    deg_u = g.out_weight[u]
    for v in subset:
        p_hat = counts.get(v, 0) / trials
        sigma = deg_u * (max(p_hat, 1e-6) / trials) ** 0.5
        assert abs(deg_u * p_hat - returns.get(v, 0.0)) <= 4 * sigma + 1e-9


def test_visit_count_c3_deterministic():
    mean, err = visit_count(c3(), 1, 0, 0, num_trials=200, seed=1)
    assert mean == pytest.approx(1.0)
    assert err == 0.0


def test_visit_count_return_identity():
    rng = random.Random(29)
    for trial in range(6):
        g = random_eulerian(rng, rng.randint(3, 6))
        v, s = rng.randrange(g.n), rng.randrange(g.n)
        if v == s:
            continue
        mean, err = visit_count(g, v, s, s, num_trials=20_000, seed=trial)
        expected = g.out_weight[v] / g.out_weight[s]
        assert abs(mean - expected) <= 3 * max(err, 1e-12)


def test_visit_count_edge_bound():
    rng = random.Random(37)
    for trial in range(5):
        g = random_eulerian(rng, 5)
        e = rng.randrange(g.m)
        s, t = int(g.src[e]), int(g.dst[e])
        if s == t:
            continue
        v = rng.randrange(g.n)
        mean, err = visit_count(g, v, s, t, num_trials=20_000, seed=trial)
        bound = g.out_weight[v] / g.weight[e]
        assert mean <= bound + 3 * max(err, 1e-12)


def test_visit_count_triangle_inequality():
    rng = random.Random(41)
    for trial in range(5):
        g = random_eulerian(rng, rng.randint(4, 6))
        v, s, u, t = (rng.randrange(g.n) for _ in range(4))
        if len({s, u, t}) < 3:
            continue
        direct, e1 = visit_count(g, v, s, t, num_trials=15_000, seed=trial)
        leg1, e2 = visit_count(g, v, s, u, num_trials=15_000, seed=trial + 50)
        leg2, e3 = visit_count(g, v, u, t, num_trials=15_000, seed=trial + 100)
        sigma = (e1 ** 2 + e2 ** 2 + e3 ** 2) ** 0.5
        assert direct <= leg1 + leg2 + 3 * max(sigma, 1e-12)
