"""Random-walk primitives backed by dense linear algebra.

The natural walk on a weighted digraph leaves a vertex along an outgoing edge
with probability proportional to its weight. Everything here is a pure
function of the (immutable) graph, so results are safe to cache and share.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import (InvalidGraphError, SingularSystemError,
                     TrappedClusterError, ZeroConditioningError)
from .graphs import (WeightedDigraph, boundary_edges, is_strongly_connected,
                     weighted_out_degree)

PIVOT_TOL = 1e-12


def transition_matrix(graph: WeightedDigraph) -> np.ndarray:
    """Dense row-stochastic matrix P[u, v] = w(u, v) / out_weight(u)."""
    n = graph.n
    p = np.zeros((n, n))
    for i in range(graph.m):
        p[int(graph.src[i]), int(graph.dst[i])] += graph.weight[i]
    deg = graph.out_weight.copy()
    if np.any(deg <= 0):
        raise InvalidGraphError("sink vertex: transition matrix undefined")
    return p / deg[:, None]


def _solve_checked(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        lu, piv = lu_factor(a)
    except Exception as exc:  # LinAlgError
        raise SingularSystemError(str(exc)) from exc
    diag = np.abs(np.diag(lu))
    scale = max(np.abs(a).max(), 1.0)
    if diag.min() <= PIVOT_TOL * scale:
        raise SingularSystemError(f"pivot {diag.min():.3e} below threshold")
    return lu_solve((lu, piv), b)


def stationary_distribution(graph: WeightedDigraph) -> np.ndarray:
    """Solve pi^T P = pi^T with a normalization row; requires strong connectivity."""
    if not is_strongly_connected(graph):
        raise SingularSystemError("graph is not strongly connected")
    n = graph.n
    p = transition_matrix(graph)
    a = p.T - np.eye(n)
    a[n - 1, :] = 1.0
    b = np.zeros(n)
    b[n - 1] = 1.0
    pi = _solve_checked(a, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _exit_system(graph: WeightedDigraph, subset: frozenset):
    """Absorbing-chain data for a cluster: first exit over its outgoing boundary.

    Returns (vertex order, index map, boundary edge ids, H) where
    H[i, j] = P(first exit from subset uses boundary edge j | start at vertex i).
    """
    verts = sorted(subset)
    index = {v: i for i, v in enumerate(verts)}
    exits = boundary_edges(graph, subset, "outgoing")
    if not exits:
        raise TrappedClusterError("cluster has no outgoing boundary edge")
    # every vertex must reach a boundary-edge tail inside the cluster
    reach = {int(graph.src[e]) for e in exits}
    queue = deque(reach)
    while queue:
        u = queue.popleft()
        for e in graph.in_edges[u]:
            x = int(graph.src[e])
            if x in subset and x not in reach:
                reach.add(x)
                queue.append(x)
    if reach < subset:
        trapped = sorted(subset - reach)
        raise TrappedClusterError(f"vertices {trapped} cannot reach the boundary")
    k = len(verts)
    q = np.zeros((k, k))
    b = np.zeros((k, len(exits)))
    exit_col = {e: j for j, e in enumerate(exits)}
    for v in verts:
        deg = graph.out_weight[v]
        for e in graph.out_edges[v]:
            head = int(graph.dst[e])
            if head in subset:
                q[index[v], index[head]] += graph.weight[e] / deg
            else:
                b[index[v], exit_col[e]] += graph.weight[e] / deg
    h = _solve_checked(np.eye(k) - q, b)
    return verts, index, exits, np.clip(h, 0.0, None)


def exit_distribution(graph: WeightedDigraph, subset, v: int) -> dict:
    """Exact probability that the first exit from ``subset`` uses each boundary edge."""
    s = frozenset(subset)
    if v not in s:
        raise InvalidGraphError(f"start vertex {v} not in subset")
    _, index, exits, h = _exit_system(graph, s)
    row = h[index[v]]
    row = row / row.sum()
    return {e: float(row[j]) for j, e in enumerate(exits)}


@dataclass
class ExitTable:
    """Per-vertex child-exit laws of the walk in ``subset``, optionally
    conditioned (Doob h-transform) on eventually leaving via ``e_end``.

    ``rows[v]`` is ``(edge_ids, probs)`` over the exit edges of the child
    containing ``v``; ``None`` marks a vertex from which the conditioning
    event is impossible. ``h[v]`` is the probability of eventually leaving
    ``subset`` via ``e_end`` (1.0 when unconditioned).
    """

    subset: frozenset
    e_end: int | None
    children: tuple
    rows: dict
    h: dict

    def distribution(self, v: int) -> tuple:
        row = self.rows[v]
        if row is None:
            raise ZeroConditioningError(
                f"start {v} cannot realize exit edge {self.e_end}")
        return row


def _exit_system_cached(graph: WeightedDigraph, subset: frozenset, cache):
    if cache is None:
        return _exit_system(graph, subset)
    got = cache.get(subset)
    if got is None:
        got = _exit_system(graph, subset)
        cache[subset] = got
    return got


def conditioned_exit_table(graph: WeightedDigraph, subset, e_end: int | None,
                           children=None, system_cache: dict | None = None) -> ExitTable:
    """Child-exit distributions of the walk in ``subset``.

    ``children`` partitions ``subset`` (defaults to singletons). With
    ``e_end=None`` rows are plain absorbing-chain exit laws of each child;
    otherwise each row is reweighted by p(f) * h(head(f)) / h(v), with h from
    a linear solve, which is the law of the walk conditioned to leave
    ``subset`` via ``e_end``.
    """
    s = frozenset(subset)
    if children is None:
        children = tuple(frozenset((v,)) for v in sorted(s))
    else:
        children = tuple(frozenset(c) for c in children)
        covered = set()
        for c in children:
            if not c <= s or covered & c:
                raise InvalidGraphError("children must partition the subset")
            covered |= c
        if covered != s:
            raise InvalidGraphError("children must cover the subset")

    if e_end is not None:
        _, index_s, exits_s, h_mat = _exit_system_cached(graph, s, system_cache)
        if e_end not in exits_s:
            raise InvalidGraphError(f"edge {e_end} is not an outgoing boundary edge")
        col = exits_s.index(e_end)
        h = {v: float(h_mat[index_s[v], col]) for v in sorted(s)}
    else:
        h = {v: 1.0 for v in sorted(s)}

    rows: dict = {}
    for child in children:
        verts, index_c, exits_c, p_mat = _exit_system_cached(graph, child, system_cache)
        heads = [int(graph.dst[e]) for e in exits_c]
        hstar = np.empty(len(exits_c))
        for j, (e, head) in enumerate(zip(exits_c, heads)):
            if head in s:
                hstar[j] = h[head]
            else:
                hstar[j] = 1.0 if (e_end is not None and e == e_end) else \
                           (1.0 if e_end is None else 0.0)
        for v in verts:
            mass = p_mat[index_c[v]] * hstar
            total = mass.sum()
            if total <= 0.0:
                rows[v] = None
                continue
            keep = mass > 0.0
            ids = np.array(exits_c, dtype=np.int64)[keep]
            probs = mass[keep] / total
            rows[v] = (ids, probs)
    return ExitTable(subset=s, e_end=e_end, children=children, rows=rows, h=h)


@dataclass
class SchurGraph:
    """Walk-equivalent compression of the graph onto a vertex subset."""

    graph: WeightedDigraph
    vertices: tuple            # original vertex id per new id
    vertex_map: dict           # original id -> new id
    original_edge: dict        # new edge id -> original edge id (None for return edges)


def schur_complement(graph: WeightedDigraph, subset) -> SchurGraph:
    """Induced subgraph of ``subset`` plus return edges u -> v weighted
    deg(u) * P(u steps outside and first re-enters the subset at v)."""
    s = frozenset(subset)
    if not s:
        raise InvalidGraphError("subset must be nonempty")
    verts = tuple(sorted(s))
    vmap = {v: i for i, v in enumerate(verts)}
    edges = []
    original = {}
    for e in range(graph.m):
        u, v = int(graph.src[e]), int(graph.dst[e])
        if u in s and v in s:
            original[len(edges)] = e
            edges.append((vmap[u], vmap[v], graph.exact_weight[e]))
    exterior = [x for x in range(graph.n) if x not in s]
    if exterior:
        xmap = {x: i for i, x in enumerate(exterior)}
        k = len(exterior)
        q = np.zeros((k, k))
        b = np.zeros((k, len(verts)))
        for x in exterior:
            deg = graph.out_weight[x]
            if deg <= 0:
                raise SingularSystemError(f"exterior vertex {x} is a sink")
            for e in graph.out_edges[x]:
                head = int(graph.dst[e])
                if head in s:
                    b[xmap[x], vmap[head]] += graph.weight[e] / deg
                else:
                    q[xmap[x], xmap[head]] += graph.weight[e] / deg
        a = _solve_checked(np.eye(k) - q, b)   # a[x, v] = P(first entry at v)
        for u in verts:
            deg_u = weighted_out_degree(graph, u)
            ret = np.zeros(len(verts))
            for e in graph.out_edges[u]:
                head = int(graph.dst[e])
                if head not in s:
                    ret += (graph.weight[e] / deg_u) * a[xmap[head]]
            for j, v in enumerate(verts):
                w = deg_u * ret[j]
                if w > 1e-14 * deg_u:
                    original[len(edges)] = None
                    edges.append((vmap[u], vmap[v], w))
    sub = WeightedDigraph(len(verts), edges)
    return SchurGraph(graph=sub, vertices=verts, vertex_map=vmap, original_edge=original)


def visit_count(graph: WeightedDigraph, v: int, s: int, t: int,
                num_trials: int, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of the expected number of visits to ``v`` by a walk
    from ``s`` before reaching ``t`` (arrival at ``t`` included, start excluded).

    Returns (estimate, standard error). Batched simulation: all trials step
    together through vectorized categorical draws.
    """
    if not is_strongly_connected(graph):
        raise InvalidGraphError("visit_count requires a strongly connected graph")
    n = graph.n
    kmax = max(len(es) for es in graph.out_edges)
    cum = np.full((n, kmax), 2.0)
    head = np.zeros((n, kmax), dtype=np.int64)
    for u in range(n):
        ws = np.array([graph.weight[e] for e in graph.out_edges[u]])
        cum[u, :len(ws)] = np.cumsum(ws) / ws.sum()
        cum[u, len(ws) - 1] = 1.0
        head[u, :len(ws)] = [int(graph.dst[e]) for e in graph.out_edges[u]]
    rng = np.random.default_rng(seed)
    counts = np.zeros(num_trials, dtype=np.int64)
    cur = np.full(num_trials, s, dtype=np.int64)
    active = np.arange(num_trials)
    while active.size:
        u = rng.random(active.size)
        idx = (cum[cur[active]] <= u[:, None]).sum(axis=1)
        nxt = head[cur[active], idx]
        counts[active] += nxt == v
        cur[active] = nxt
        active = active[nxt != t]
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / np.sqrt(num_trials)) if num_trials > 1 else 0.0
    return mean, stderr
