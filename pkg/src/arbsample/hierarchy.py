"""Laminar cluster hierarchy built from a loose cycle decomposition.

Every edge of an Eulerian graph lies on a cycle whose edges all weigh at least
w(e)/m. Sorting these cycles by minimum weight (descending) and taking
connected components of the growing union yields a laminar family of vertex
clusters: regions a walk explores thoroughly before leaving. Each edge is a
"jumping edge" of exactly one cluster, the lowest one containing both
endpoints.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import InvalidGraphError, NoCycleError
from .graphs import WeightedDigraph


@dataclass(frozen=True)
class Cycle:
    """Simple directed cycle through ``anchor`` with all weights >= floor."""

    edges: tuple            # edge ids in walk order
    anchor: int             # the edge this cycle was grown around
    min_weight: float

    def vertices(self, graph: WeightedDigraph) -> frozenset:
        return frozenset(int(graph.src[e]) for e in self.edges)


def find_cycle(graph: WeightedDigraph, e: int) -> Cycle:
    """Shortest simple cycle through edge ``e`` using only edges of weight
    >= w(e)/m. Exists for every edge of an Eulerian graph."""
    if not (0 <= e < graph.m):
        raise InvalidGraphError(f"edge {e} out of range")
    floor = graph.weight[e] / graph.m
    u, v = int(graph.src[e]), int(graph.dst[e])
    if u == v:
        return Cycle(edges=(e,), anchor=e, min_weight=float(graph.weight[e]))
    # BFS from head(e) back to tail(e) in the floored subgraph
    parent: dict[int, tuple[int, int]] = {v: (-1, -1)}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        if x == u:
            break
        for f in graph.out_edges[x]:
            if graph.weight[f] < floor:
                continue
            y = int(graph.dst[f])
            if y not in parent:
                parent[y] = (x, f)
                queue.append(y)
    if u not in parent:
        raise NoCycleError(
            f"no cycle above floor {floor} through edge {e}; "
            "input is not Eulerian or not strongly connected")
    path = []
    x = u
    while x != v:
        px, pf = parent[x]
        path.append(pf)
        x = px
    path.reverse()
    edges = (e, *path)
    return Cycle(edges=edges, anchor=e,
                 min_weight=float(min(graph.weight[f] for f in edges)))


@dataclass
class HierarchyNode:
    id: int
    vertices: frozenset
    parent: int | None = None
    children: list = field(default_factory=list)
    depth: int = 0
    jumping_edges: list = field(default_factory=list)
    w_max: float | None = None

    @property
    def is_leaf(self) -> bool:
        return len(self.vertices) == 1


class Hierarchy:
    """Laminar family of clusters with jumping-edge annotations.

    ``nodes[0]`` is always the root (the full vertex set); singleton leaves
    exist for every vertex.
    """

    def __init__(self, graph: WeightedDigraph, internal_sets: list):
        self.graph = graph
        sets = []
        seen = set()
        for s in internal_sets:
            if len(s) > 1 and s not in seen:
                seen.add(s)
                sets.append(s)
        full = frozenset(range(graph.n))
        if full not in seen:
            sets.append(full)
        sets.sort(key=len, reverse=True)
        self.nodes: list[HierarchyNode] = []
        for s in sets:
            self.nodes.append(HierarchyNode(id=len(self.nodes), vertices=s))
        self.leaf_of = {}
        for v in range(graph.n):
            leaf = HierarchyNode(id=len(self.nodes), vertices=frozenset((v,)))
            self.nodes.append(leaf)
            self.leaf_of[v] = leaf.id
        # parent = smallest strictly-containing set; sets are sorted by size
        # descending so scanning backward finds the tightest parent first
        for i, node in enumerate(self.nodes):
            if node.vertices == full:
                continue
            for j in range(min(i, len(sets)) - 1, -1, -1):
                cand = self.nodes[j]
                if len(cand.vertices) > len(node.vertices) and node.vertices <= cand.vertices:
                    node.parent = cand.id
                    break
            else:
                node.parent = 0
            self.nodes[node.parent].children.append(node.id)
        self.root = 0
        self._assign_depths()
        self._assign_jumping_edges()

    def _assign_depths(self):
        queue = deque([self.root])
        while queue:
            i = queue.popleft()
            for c in self.nodes[i].children:
                self.nodes[c].depth = self.nodes[i].depth + 1
                queue.append(c)

    def _assign_jumping_edges(self):
        g = self.graph
        for e in range(g.m):
            node = self.jumping_node(e)
            self.nodes[node].jumping_edges.append(e)
        for node in self.nodes:
            if node.jumping_edges:
                node.w_max = float(max(g.weight[e] for e in node.jumping_edges))

    def jumping_node(self, e: int) -> int:
        """Lowest node containing both endpoints of edge ``e``."""
        u, v = int(self.graph.src[e]), int(self.graph.dst[e])
        a, b = self.leaf_of[u], self.leaf_of[v]
        while self.nodes[a].depth > self.nodes[b].depth:
            a = self.nodes[a].parent
        while self.nodes[b].depth > self.nodes[a].depth:
            b = self.nodes[b].parent
        while a != b:
            a = self.nodes[a].parent
            b = self.nodes[b].parent
        return a

    def internal_nodes(self) -> list:
        return [n for n in self.nodes if not n.is_leaf]

    def child_of_vertex(self, node_id: int, v: int) -> int:
        """The child of ``node_id`` whose vertex set contains ``v``."""
        c = self.leaf_of[v]
        while True:
            p = self.nodes[c].parent
            if p == node_id:
                return c
            if p is None:
                raise InvalidGraphError(f"vertex {v} not under node {node_id}")
            c = p

    def format_tree(self) -> str:
        """Indented debug dump: vertex sets, w_max, jumping-edge counts."""
        lines = []

        def walk(i, indent):
            node = self.nodes[i]
            vs = ",".join(str(v) for v in sorted(node.vertices))
            wm = f"{node.w_max:g}" if node.w_max is not None else "-"
            lines.append(f"{'  ' * indent}{{{vs}}} w_max={wm} "
                         f"jumping_edges={len(node.jumping_edges)}")
            for c in sorted(node.children, key=lambda c: min(self.nodes[c].vertices)):
                walk(c, indent + 1)

        walk(self.root, 0)
        return "\n".join(lines) + "\n"


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.members = [[i] for i in range(n)]

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if len(self.members[ra]) < len(self.members[rb]):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.members[ra].extend(self.members[rb])
        self.members[rb] = []
        return ra


def build_hierarchy(graph: WeightedDigraph) -> Hierarchy:
    """Laminar hierarchy of an Eulerian, strongly connected graph.

    One cycle is grown around each edge; cycles are consumed from the heaviest
    minimum weight down, and after each distinct weight level the connected
    components touched so far become cluster candidates (duplicates collapse).
    """
    cycles = [find_cycle(graph, e) for e in range(graph.m)]
    cycles.sort(key=lambda c: (-c.min_weight, c.anchor))
    uf = _UnionFind(graph.n)
    touched: set[int] = set()
    internal_sets: list[frozenset] = []
    i = 0
    while i < len(cycles):
        level = cycles[i].min_weight
        roots = set()
        while i < len(cycles) and cycles[i].min_weight == level:
            for e in cycles[i].edges:
                u, v = int(graph.src[e]), int(graph.dst[e])
                touched.add(u)
                touched.add(v)
                uf.union(u, v)
            roots.add(uf.find(int(graph.src[cycles[i].anchor])))
            i += 1
        for r in {uf.find(r) for r in roots}:
            internal_sets.append(frozenset(uf.members[r]))
    return Hierarchy(graph, internal_sets)
