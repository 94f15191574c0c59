"""Shared fixtures and graph generators."""

import random
from fractions import Fraction

import pytest

from arbsample.graphs import WeightedDigraph


def c3():
    """Directed 3-cycle, unit weights."""
    return WeightedDigraph(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])


def k3():
    """Bidirected triangle, unit weights."""
    return WeightedDigraph(3, [(0, 1, 1), (1, 0, 1), (0, 2, 1),
                               (2, 0, 1), (1, 2, 1), (2, 1, 1)])


def k4():
    edges = []
    for u in range(4):
        for v in range(4):
            if u != v:
                edges.append((u, v, 1))
    return WeightedDigraph(4, edges)


def barbell(w=1000):
    """a<->b heavy, b<->c light: covering c from a needs ~w steps."""
    return WeightedDigraph(3, [(0, 1, w), (1, 0, w), (1, 2, 1), (2, 1, 1)])


def advance_reset(n):
    """Line 0->1->...->n-1 where every interior vertex may reset to 0;
    forward cover time grows like 2^n."""
    edges = [(i, i + 1, 1) for i in range(n - 1)]
    edges += [(i, 0, 1) for i in range(1, n)]
    return WeightedDigraph(n, edges)


def two_state_loop():
    """0->1, 1->0, 1->1: stationary (1/3, 2/3)."""
    return WeightedDigraph(2, [(0, 1, 1), (1, 0, 1), (1, 1, 1)])


def random_strongly_connected(rng: random.Random, n: int, extra: int = None,
                              max_weight: int = 9, fraction_weights: bool = False):
    """Random cycle through all vertices plus random extra edges."""
    perm = list(range(n))
    rng.shuffle(perm)
    edges = []
    for i in range(n):
        u, v = perm[i], perm[(i + 1) % n]
        edges.append((u, v, rng.randint(1, max_weight)))
    if extra is None:
        extra = rng.randint(n // 2, 2 * n)
    for _ in range(extra):
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v:
            continue
        edges.append((u, v, rng.randint(1, max_weight)))
    if fraction_weights:
        edges = [(u, v, Fraction(w, rng.randint(1, 4))) for u, v, w in edges]
    return WeightedDigraph(n, edges)


def random_eulerian(rng: random.Random, n: int, cycles: int = None,
                    weights=None):
    """Superpose directed cycles: one through all vertices (connectivity),
    then random cycles over random subsets. Eulerian by construction.

    ``weights`` is an optional callable rng -> weight; defaults to a two-tier
    scale so real multi-level hierarchies form.
    """
    if weights is None:
        weights = lambda r: r.choice([1, 1, 2, 32, 64])
    if cycles is None:
        cycles = rng.randint(1, max(2, n // 2))
    edges = []
    perm = list(range(n))
    rng.shuffle(perm)
    w = weights(rng)
    for i in range(n):
        edges.append((perm[i], perm[(i + 1) % n], w))
    for _ in range(cycles):
        k = rng.randint(2, n)
        sub = rng.sample(range(n), k)
        w = weights(rng)
        for i in range(k):
            edges.append((sub[i], sub[(i + 1) % k], w))
    return WeightedDigraph(n, edges)


@pytest.fixture
def rng():
    return random.Random(20240817)
