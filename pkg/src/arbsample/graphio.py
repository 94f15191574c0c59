"""Graph file format.

Header line ``n m`` (optionally ``n m undirected``), then m body lines
``u v w`` with 0-based vertex ids and a positive weight written as a decimal
or a rational ``p/q``. Lines starting with ``#`` are ignored. The undirected
flag expands each line into the two directed copies.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import GraphFormatError
from .graphs import WeightedDigraph


def _parse_weight(tok: str) -> Fraction:
    try:
        if "/" in tok:
            return Fraction(tok)
        return Fraction(tok)  # Fraction("0.25") is exact decimal parsing
    except (ValueError, ZeroDivisionError) as exc:
        raise GraphFormatError(f"bad weight {tok!r}") from exc


def parse_graph(text: str) -> WeightedDigraph:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise GraphFormatError("empty graph file")
    header = lines[0].split()
    undirected = False
    if len(header) == 3 and header[2] == "undirected":
        undirected = True
    elif len(header) != 2:
        raise GraphFormatError(f"bad header {lines[0]!r}: expected 'n m [undirected]'")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError as exc:
        raise GraphFormatError(f"bad header {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise GraphFormatError(f"expected {m} edge lines, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise GraphFormatError(f"bad edge line {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise GraphFormatError(f"bad edge line {ln!r}") from exc
        w = _parse_weight(parts[2])
        if w <= 0:
            raise GraphFormatError(f"weight must be positive: {ln!r}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex id out of range: {ln!r}")
        edges.append((u, v, w))
        if undirected:
            edges.append((v, u, w))
    try:
        return WeightedDigraph(n, edges)
    except Exception as exc:
        raise GraphFormatError(str(exc)) from exc


def load_graph(path: str) -> WeightedDigraph:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_graph(fh.read())
    except OSError as exc:
        raise GraphFormatError(f"cannot read {path}: {exc}") from exc


def format_weight(w: Fraction) -> str:
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def format_graph(graph: WeightedDigraph) -> str:
    lines = [f"{graph.n} {graph.m}"]
    for i in range(graph.m):
        lines.append(f"{int(graph.src[i])} {int(graph.dst[i])} "
                     f"{format_weight(graph.exact_weight[i])}")
    return "\n".join(lines) + "\n"
