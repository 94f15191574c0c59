"""Ground-truth machinery: exact arborescence counting and enumeration.

Everything here works in exact rational arithmetic. Float weights are exact
rationals too (every double is), so the determinant path never needs a lossy
fallback; results agree bit-for-bit with enumeration whenever both run.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from scipy.stats import chi2

from .errors import TooLargeError, UnknownTreeError
from .graphs import Arborescence, WeightedDigraph, validate_arborescence

ENUMERATION_LIMIT = 8


@dataclass
class ArborescenceCatalog:
    """All arborescences rooted at ``root`` with exact weights."""

    root: int
    entries: list          # list of (Arborescence, Fraction weight)
    total: Fraction

    def probability(self, tree: Arborescence) -> Fraction:
        key = tree.key()
        for t, w in self.entries:
            if t.key() == key:
                return w / self.total
        raise UnknownTreeError(f"tree {key} not in catalog for root {self.root}")

    def as_text(self, graph: WeightedDigraph) -> str:
        """Deterministic, canonically ordered text export for golden files."""
        lines = [f"root={self.root} trees={len(self.entries)} total={self.total}"]
        rows = sorted((t.to_line(graph), w) for t, w in self.entries)
        for line, w in rows:
            lines.append(f"{line} weight={w}")
        return "\n".join(lines) + "\n"


def enumerate_arborescences(graph: WeightedDigraph, root: int) -> ArborescenceCatalog:
    """Brute force over all out-edge choices per non-root vertex (n <= 8)."""
    if graph.n > ENUMERATION_LIMIT:
        raise TooLargeError(f"enumeration guard: n={graph.n} > {ENUMERATION_LIMIT}")
    nonroot = [v for v in range(graph.n) if v != root]
    entries = []
    total = Fraction(0)
    for choice in itertools.product(*[graph.out_edges[v] for v in nonroot]):
        tree = Arborescence(root=root, parent_edge=dict(zip(nonroot, choice)))
        if validate_arborescence(graph, tree):
            w = math.prod((graph.exact_weight[e] for e in choice), start=Fraction(1))
            entries.append((tree, w))
            total += w
    return ArborescenceCatalog(root=root, entries=entries, total=total)


def _bareiss_determinant(rows: list[list[int]]) -> int:
    """Fraction-free Gaussian elimination; exact integer determinant."""
    n = len(rows)
    if n == 0:
        return 1
    m = [row[:] for row in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def count_arborescences(graph: WeightedDigraph, root: int) -> Fraction:
    """Total weight of arborescences rooted at ``root``.

    Principal minor at ``root`` of L = diag(weighted out-degree) - W, where
    W[u][v] sums the weights of edges u -> v. The orientation convention is
    pinned by exact agreement with :func:`enumerate_arborescences`.
    """
    n = graph.n
    lap = [[Fraction(0)] * n for _ in range(n)]
    for i in range(graph.m):
        u, v = int(graph.src[i]), int(graph.dst[i])
        w = graph.exact_weight[i]
        lap[u][u] += w
        lap[u][v] -= w
    keep = [v for v in range(n) if v != root]
    minor = [[lap[u][v] for v in keep] for u in keep]
    # clear denominators row by row so Bareiss runs over integers
    scale = Fraction(1)
    int_rows = []
    for row in minor:
        den = math.lcm(*(x.denominator for x in row)) if row else 1
        scale *= den
        int_rows.append([int(x * den) for x in row])
    det = _bareiss_determinant(int_rows)
    return Fraction(det) / scale


def full_catalog(graph: WeightedDigraph) -> dict:
    """Catalogs for every root; joint law over (root, tree) is ∝ tree weight."""
    return {r: enumerate_arborescences(graph, r) for r in range(graph.n)}


def joint_probabilities(catalogs: dict) -> dict:
    """Map tree key -> exact probability under P(T) ∝ Π edge weights."""
    grand = sum((c.total for c in catalogs.values()), Fraction(0))
    probs = {}
    for c in catalogs.values():
        for tree, w in c.entries:
            probs[tree.key()] = w / grand
    return probs


@dataclass
class DistributionReport:
    tv_distance: float
    chi_square_p: float
    per_tree_counts: dict
    n_samples: int


def distribution_report(samples: list[Arborescence], catalog) -> DistributionReport:
    """Compare sampled trees with an exact law.

    ``catalog`` is either a single-root :class:`ArborescenceCatalog` (all
    samples must share its root) or a dict of per-root catalogs (joint law).
    Raises UnknownTreeError if a sample does not appear in the catalog.
    """
    if isinstance(catalog, ArborescenceCatalog):
        probs = {t.key(): w / catalog.total for t, w in catalog.entries}
        for s in samples:
            if s.root != catalog.root:
                raise UnknownTreeError(f"sample root {s.root} != catalog root {catalog.root}")
    else:
        probs = joint_probabilities(catalog)
    counts: dict = {}
    for s in samples:
        k = s.key()
        if k not in probs:
            raise UnknownTreeError(f"sampled tree {k} has zero exact probability")
        counts[k] = counts.get(k, 0) + 1
    n = len(samples)
    tv = 0.5 * sum(abs(counts.get(k, 0) / n - float(p)) for k, p in probs.items())
    stat = 0.0
    for k, p in probs.items():
        expected = n * float(p)
        stat += (counts.get(k, 0) - expected) ** 2 / expected
    pvalue = float(chi2.sf(stat, df=max(len(probs) - 1, 1)))
    return DistributionReport(tv_distance=tv, chi_square_p=pvalue,
                              per_tree_counts=counts, n_samples=n)


def exact_stationary(graph: WeightedDigraph) -> list[Fraction]:
    """Stationary distribution solved in exact rational arithmetic."""
    n = graph.n
    deg = [Fraction(0)] * n
    for i in range(graph.m):
        deg[int(graph.src[i])] += graph.exact_weight[i]
    # rows of (P^T - I), last replaced by normalization
    a = [[Fraction(0)] * (n + 1) for _ in range(n)]
    for i in range(graph.m):
        u, v = int(graph.src[i]), int(graph.dst[i])
        a[v][u] += graph.exact_weight[i] / deg[u]
    for v in range(n):
        a[v][v] -= 1
    a[n - 1] = [Fraction(1)] * n + [Fraction(1)]
    for c in range(n):
        pivot = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[pivot] = a[pivot], a[c]
        inv = a[c][c]
        a[c] = [x / inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[v][n] for v in range(n)]
