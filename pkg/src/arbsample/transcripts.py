"""Partially expanded walk transcripts.

A transcript alternates clusters and edges: (S_1, e_1), (S_2, e_2), ...,
meaning the walk wanders inside S_i and leaves it through e_i. Fully expanded
stretches have singleton clusters, so their edges chain into a plain
vertex-level walk; an item with a non-singleton cluster is an opaque marker
for a segment that was never expanded (depth limit or exhausted budget). The
final item may carry ``edge=None`` when the walk was cut without a
conditioning exit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import WeightedDigraph
from .hierarchy import Hierarchy


@dataclass
class Transcript:
    start: int
    items: list           # list of (node_id, edge_id | None)
    hierarchy: Hierarchy

    def edges(self) -> list:
        return [e for _, e in self.items if e is not None]

    def jump_counts(self) -> dict:
        """Edges charged to the node whose children they jump between."""
        counts: dict = {}
        for _, e in self.items:
            if e is None:
                continue
            node = self.hierarchy.jumping_node(e)
            counts[node] = counts.get(node, 0) + 1
        return counts

    def is_fully_expanded(self) -> bool:
        return all(self.hierarchy.nodes[n].is_leaf
                   for n, e in self.items if e is not None)


def validate_transcript(transcript: Transcript, budget: int | None = None) -> bool:
    """Structural legality: the walk threads through consecutive endpoints.

    Every item's cluster must contain the walk's current position; the item's
    edge must leave that cluster's vertex set from the current position (for
    singleton clusters) and moves the walk to its head. With ``budget`` given,
    no node may own more than ``budget`` jumping edges.
    """
    h = transcript.hierarchy
    g = h.graph
    cur = transcript.start
    for i, (node_id, e) in enumerate(transcript.items):
        node = h.nodes[node_id]
        if cur not in node.vertices:
            return False
        if e is None:
            if i != len(transcript.items) - 1:
                return False
            break
        tail, head = int(g.src[e]), int(g.dst[e])
        if node.is_leaf and tail != cur:
            return False
        if tail not in node.vertices:
            return False
        cur = head
    if budget is not None:
        counts = transcript.jump_counts()
        if any(c > budget for c in counts.values()):
            return False
    return True


def transcript_covers(transcript: Transcript, n: int) -> bool:
    """Certify that the transcript pins down every vertex's first visit.

    True iff all vertices get a visible arrival and every opaque (non-leaf)
    marker occurs only after its whole vertex set has already been visited --
    otherwise a first visit may hide inside an unexpanded segment.
    """
    h = transcript.hierarchy
    g = h.graph
    visited = {transcript.start}
    for node_id, e in transcript.items:
        node = h.nodes[node_id]
        if not node.is_leaf and not node.vertices <= visited:
            return False
        if e is not None:
            visited.add(int(g.dst[e]))
    return len(visited) == n


def extract_first_visits(transcript: Transcript, start: int) -> dict:
    """Map each vertex (except ``start``) to the edge whose head first reached it.

    Sound whenever :func:`transcript_covers` holds; later arrivals at visited
    vertices are ignored.
    """
    g = transcript.hierarchy.graph
    visited = {start}
    first: dict = {}
    for _, e in transcript.items:
        if e is None:
            continue
        head = int(g.dst[e])
        if head not in visited:
            visited.add(head)
            first[head] = e
    return first
