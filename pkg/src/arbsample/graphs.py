"""Weighted digraph representation and structural queries.

Vertices are dense integer ids ``0..n-1``; edges are identified by their index
into the edge list, so parallel edges and self-loops stay distinct. Weights are
kept twice: as float64 for the sampling path and as exact ``Fraction`` values
for the counting oracle.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidGraphError

VertexSubset = frozenset  # alias: vertex subsets are plain frozensets of ids


def _to_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, int):
        return Fraction(w)
    if isinstance(w, float):
        return Fraction(w)  # exact value of the double
    if isinstance(w, str):
        return Fraction(w)
    raise InvalidGraphError(f"unsupported weight type: {type(w)!r}")


class WeightedDigraph:
    """Immutable weighted digraph with parallel edges and self-loops allowed.

    Parameters
    ----------
    n : number of vertices
    edges : iterable of (src, dst, weight); weight must be strictly positive
        and finite. Order is preserved and defines edge ids.
    labels : optional external vertex labels kept as a side table.
    """

    __slots__ = ("n", "m", "src", "dst", "weight", "exact_weight",
                 "out_edges", "in_edges", "out_weight", "in_weight", "labels")

    def __init__(self, n: int, edges: Iterable[tuple], labels: Sequence[str] | None = None):
        if n <= 0:
            raise InvalidGraphError("graph needs at least one vertex")
        edge_list = list(edges)
        src = np.empty(len(edge_list), dtype=np.int64)
        dst = np.empty(len(edge_list), dtype=np.int64)
        weight = np.empty(len(edge_list), dtype=np.float64)
        exact = []
        out_edges: list[list[int]] = [[] for _ in range(n)]
        in_edges: list[list[int]] = [[] for _ in range(n)]
        for i, (u, v, w) in enumerate(edge_list):
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidGraphError(f"edge {i}: endpoint out of range: ({u}, {v})")
            wf = _to_fraction(w)
            if wf <= 0:
                raise InvalidGraphError(f"edge {i}: weight must be strictly positive, got {w}")
            if not np.isfinite(float(wf)):
                raise InvalidGraphError(f"edge {i}: weight must be finite, got {w}")
            src[i] = u
            dst[i] = v
            weight[i] = float(wf)
            exact.append(wf)
            out_edges[u].append(i)
            in_edges[v].append(i)
        self.n = n
        self.m = len(edge_list)
        self.src = src
        self.dst = dst
        self.weight = weight
        self.exact_weight = tuple(exact)
        self.out_edges = tuple(tuple(es) for es in out_edges)
        self.in_edges = tuple(tuple(es) for es in in_edges)
        self.out_weight = np.zeros(n)
        self.in_weight = np.zeros(n)
        np.add.at(self.out_weight, src, weight)
        np.add.at(self.in_weight, dst, weight)
        self.labels = tuple(labels) if labels is not None else None

    def edge(self, i: int) -> tuple[int, int, float]:
        return int(self.src[i]), int(self.dst[i]), float(self.weight[i])

    def edge_tuples(self) -> list[tuple[int, int, float]]:
        return [self.edge(i) for i in range(self.m)]

    def __eq__(self, other):
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst)
                and self.exact_weight == other.exact_weight)

    def __hash__(self):
        return hash((self.n, bytes(self.src.data), bytes(self.dst.data)))

    def __repr__(self):
        return f"WeightedDigraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class Arborescence:
    """Spanning tree oriented toward ``root``.

    ``parent_edge`` maps every non-root vertex to the id of its unique
    outgoing tree edge (in the host graph) on the path toward the root.
    """

    root: int
    parent_edge: dict = field(compare=False)

    def edge_ids(self) -> tuple[int, ...]:
        return tuple(self.parent_edge[v] for v in sorted(self.parent_edge))

    def key(self) -> tuple:
        """Canonical hashable identity: (root, ((vertex, edge id), ...))."""
        return (self.root, tuple(sorted(self.parent_edge.items())))

    def to_line(self, graph: WeightedDigraph) -> str:
        """Output line format: ``root=r; v:parent_vertex,...`` in vertex order."""
        parts = []
        for v in sorted(self.parent_edge):
            parts.append(f"{v}:{int(graph.dst[self.parent_edge[v]])}")
        return f"root={self.root}; " + ",".join(parts)

    def to_key_line(self, graph: WeightedDigraph) -> str:
        """Edge-aware canonical form ``root=r; v:parent[edge_id],...`` that
        keeps parallel-edge trees distinct."""
        parts = []
        for v in sorted(self.parent_edge):
            e = self.parent_edge[v]
            parts.append(f"{v}:{int(graph.dst[e])}[{e}]")
        return f"root={self.root}; " + ",".join(parts)


def weighted_out_degree(graph: WeightedDigraph, v: int) -> float:
    """Sum of weights of edges leaving ``v`` (self-loops included)."""
    if not (0 <= v < graph.n):
        raise InvalidGraphError(f"vertex {v} out of range")
    return float(graph.out_weight[v])


def weighted_in_degree(graph: WeightedDigraph, v: int) -> float:
    if not (0 <= v < graph.n):
        raise InvalidGraphError(f"vertex {v} out of range")
    return float(graph.in_weight[v])


def boundary_edges(graph: WeightedDigraph, subset, direction: str) -> list[int]:
    """Edge ids crossing the subset boundary.

    ``direction="outgoing"``: tail inside, head outside.
    ``direction="incoming"``: tail outside, head inside.
    """
    s = frozenset(subset)
    if not s:
        raise InvalidGraphError("subset must be nonempty")
    if direction == "outgoing":
        return [e for v in sorted(s) for e in graph.out_edges[v] if int(graph.dst[e]) not in s]
    if direction == "incoming":
        return [e for v in sorted(s) for e in graph.in_edges[v] if int(graph.src[e]) not in s]
    raise ValueError(f"direction must be 'incoming' or 'outgoing', got {direction!r}")


def is_eulerian(graph: WeightedDigraph, rel_tol: float = 1e-9) -> bool:
    """True iff weighted in-degree equals weighted out-degree at every vertex."""
    for v in range(graph.n):
        i, o = graph.in_weight[v], graph.out_weight[v]
        if abs(i - o) > rel_tol * max(abs(i), abs(o), 1e-300):
            return False
    return True


def _reachable(graph: WeightedDigraph, start: int, adjacency, inside=None) -> set:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for e in adjacency[u]:
            v = int(graph.dst[e]) if adjacency is graph.out_edges else int(graph.src[e])
            if inside is not None and v not in inside:
                continue
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def is_strongly_connected(graph: WeightedDigraph) -> bool:
    if graph.n == 1:
        return True
    fwd = _reachable(graph, 0, graph.out_edges)
    if len(fwd) < graph.n:
        return False
    bwd = _reachable(graph, 0, graph.in_edges)
    return len(bwd) == graph.n


def weight_floor_connected(graph: WeightedDigraph, subset, w_c: float) -> bool:
    """True iff the subgraph induced by ``subset``, keeping only edges of weight
    >= ``w_c``, is strongly connected."""
    s = frozenset(subset)
    if not s:
        raise InvalidGraphError("subset must be nonempty")
    if len(s) == 1:
        return True
    start = next(iter(s))

    def sweep(adjacency, endpoint):
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for e in adjacency[u]:
                if graph.weight[e] < w_c:
                    continue
                v = endpoint(e)
                if v in s and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen

    fwd = sweep(graph.out_edges, lambda e: int(graph.dst[e]))
    if fwd != s:
        return False
    bwd = sweep(graph.in_edges, lambda e: int(graph.src[e]))
    return bwd == s


def reverse_graph(graph: WeightedDigraph) -> WeightedDigraph:
    """Edge-flipped graph: every edge (u, v, w) becomes (v, u, w), same ids.

    For Eulerian graphs the walk on the result is the time reversal of the walk
    on the input.
    """
    edges = [(int(graph.dst[i]), int(graph.src[i]), graph.exact_weight[i])
             for i in range(graph.m)]
    return WeightedDigraph(graph.n, edges, labels=graph.labels)


def validate_arborescence(graph: WeightedDigraph, tree: Arborescence) -> bool:
    """Check that ``tree`` is a well-formed arborescence of ``graph``."""
    r = tree.root
    if not (0 <= r < graph.n):
        return False
    if set(tree.parent_edge) != set(range(graph.n)) - {r}:
        return False
    for v, e in tree.parent_edge.items():
        if not (0 <= e < graph.m) or int(graph.src[e]) != v:
            return False
    for v in tree.parent_edge:
        seen = set()
        cur = v
        while cur != r:
            if cur in seen:
                return False
            seen.add(cur)
            cur = int(graph.dst[tree.parent_edge[cur]])
        # reaching r certifies this vertex; cycles would revisit
    return True


def check_walkable(graph: WeightedDigraph) -> None:
    """Reject graphs a random walk cannot traverse from every vertex.

    Raises InvalidGraphError for sinks (no outgoing edge); vertices that no
    walk can ever leave make every sampler precondition fail upstream.
    """
    for v in range(graph.n):
        if not graph.out_edges[v]:
            raise InvalidGraphError(f"vertex {v} is a sink (no outgoing edge)")
