"""Arborescence samplers.

Two samplers share one output law, P(T) proportional to the product of tree
edge weights:

* ``hierarchical`` -- the shortcut sampler. Per sample: draw the root from the
  per-root tree mass, reduce to an Eulerian graph, walk its edge-flip (the
  time reversal) as a budgeted hierarchical expansion, and reverse the
  first-visit edges. Walk segments inside a cluster are generated from the
  cluster's conditioned child-exit tables, so heavy regions cost at most their
  jumping-edge budget instead of their (possibly exponential) dwell time.

* ``sequential`` -- the literal baseline: simulate the time-reversed chain of
  the input until every vertex is visited.

All randomness is keyed by structured task ids (see ``randomness``), so a
fixed seed reproduces identical trees for any worker count. Expansions draw
virtual cached answers addressed by (cluster, entry, exit, slot); a slot that
repeats within one sample is detected and replaced by an occurrence-keyed
fresh stream, so no stored answer is ever consumed twice.
"""

from __future__ import annotations

import os
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import (CoverageFailureError, InvalidGraphError,
                     ZeroConditioningError)
from .graphs import Arborescence, WeightedDigraph, check_walkable, reverse_graph
from .hierarchy import Hierarchy, build_hierarchy
from .randomness import CategoricalSampler, RandomnessPlan, Stream, TieUnresolved
from .reduction import reduce, root_distribution
from .transcripts import Transcript
from .walks import conditioned_exit_table, stationary_distribution

DEFAULT_SAFETY = 8
DEFAULT_MAX_RETRIES = 20


def choose_budget(n: int, m: int, safety: int = DEFAULT_SAFETY) -> int:
    """Per-cluster cap on simulated jumping edges.

    The expected number of jumps across a cluster before it is covered is at
    most n^2 m^2; the safety factor plus retry doubling covers the tail.
    """
    return safety * n * n * m * m


def default_cache_multiplicity(budget: int) -> int:
    """Answer-store multiplicity M. Collisions among k slot draws occur with
    probability about k^2 / 2M, so growing M linearly with the budget keeps
    reuse rare while staying polynomial."""
    return max(64, 4 * budget)


class ExpansionContext:
    """Per-(graph, hierarchy) caches: child maps and exit sampling tables."""

    def __init__(self, graph: WeightedDigraph, hierarchy: Hierarchy):
        self.graph = graph
        self.hierarchy = hierarchy
        self._system_cache: dict = {}
        self._tables: dict = {}
        self._child_map: dict = {}
        self._lock = threading.Lock()

    def child_map(self, node_id: int) -> dict:
        got = self._child_map.get(node_id)
        if got is None:
            h = self.hierarchy
            got = {}
            for c in h.nodes[node_id].children:
                for v in h.nodes[c].vertices:
                    got[v] = c
            with self._lock:
                self._child_map[node_id] = got
        return got

    def tables(self, node_id: int, e_end: int | None) -> dict:
        """v -> CategoricalSampler over child-exit edge ids (None if the
        conditioning event is impossible from v)."""
        key = (node_id, e_end)
        got = self._tables.get(key)
        if got is None:
            h = self.hierarchy
            node = h.nodes[node_id]
            children = [h.nodes[c].vertices for c in node.children]
            table = conditioned_exit_table(self.graph, node.vertices, e_end,
                                           children=children,
                                           system_cache=self._system_cache)
            got = {}
            for v, row in table.rows.items():
                if row is None:
                    got[v] = None
                else:
                    ids, probs = row
                    got[v] = CategoricalSampler([int(e) for e in ids], probs)
            with self._lock:
                self._tables[key] = got
        return got


class _Done(Exception):
    """All vertices certified covered; remaining expansion is irrelevant."""


class _CoverageFail(Exception):
    """An unexpanded segment may hide a first visit; retry with more budget."""


@dataclass
class _ExpState:
    plan: RandomnessPlan
    budgets: dict
    call_cap: int
    use_cache: bool
    cache_multiplicity: int
    items: list | None = None          # transcript recording (None = off)
    visited: set | None = None         # coverage tracking (None = off)
    first_visit: dict = field(default_factory=dict)
    target: int = 0                    # vertex count for early stop
    used_slots: dict = field(default_factory=dict)
    answer_uses: dict = field(default_factory=dict)
    collisions: int = 0
    transcript_len: int = 0
    jumps: dict = field(default_factory=dict)


def _emit(state: _ExpState, ctx: ExpansionContext, node_id: int, edge: int | None):
    node = ctx.hierarchy.nodes[node_id]
    if state.visited is not None and not node.is_leaf:
        if not node.vertices <= state.visited:
            raise _CoverageFail
    if state.items is not None:
        state.items.append((node_id, edge))
    if edge is None:
        return
    state.transcript_len += 1
    if state.visited is not None:
        head = int(ctx.graph.dst[edge])
        if head not in state.visited:
            state.visited.add(head)
            state.first_visit[head] = edge
            if len(state.visited) >= state.target:
                raise _Done


def _occurrence_stream(state: _ExpState, node_id: int, entry: int,
                       e_end: int | None, path: tuple):
    """Stream for one cluster-expansion occurrence.

    Cached mode draws a slot uniformly from the virtual answer store; a repeat
    of (cluster, entry, exit, slot) within this sample is a detected reuse and
    is replaced by a fresh occurrence-keyed stream.
    """
    if not state.use_cache:
        key = ("fresh",) + path
        return state.plan.stream(*key), key
    answer = (node_id, entry, e_end)
    slot = state.plan.randint(state.cache_multiplicity, "slot", *path)
    full = (answer, slot)
    if full in state.used_slots:
        state.collisions += 1
        key = ("repl",) + path
        return state.plan.stream(*key), key
    state.used_slots[full] = path
    state.answer_uses[full] = 1
    key = ("ans", node_id, entry, e_end, slot)
    return state.plan.stream(*key), key


def _draw(rows: dict, cur: int, stream: Stream, plan: RandomnessPlan,
          stream_key: tuple, t: int) -> int:
    sampler = rows[cur]
    if sampler is None:
        raise ZeroConditioningError(f"walk from {cur} cannot realize the exit edge")
    u = stream.u64()
    try:
        return sampler.draw_at(u)
    except TieUnresolved:
        counter = iter(range(1 << 30))
        return sampler.draw_at(
            u, lambda: plan.u64(*stream_key, "ext", t, next(counter)))


def _expand(ctx: ExpansionContext, state: _ExpState, node_id: int, entry: int,
            e_end: int | None, depth_left: int, path: tuple) -> None:
    """Emit the walk segment: inside node ``node_id`` from ``entry``, then out
    via ``e_end`` (when given). Exit edges ground out at leaf depth, so each
    edge is emitted exactly once."""
    node = ctx.hierarchy.nodes[node_id]
    if node.is_leaf:
        _emit(state, ctx, node_id, e_end)
        return
    if depth_left <= 0 or state.budgets.get(node_id, 0) <= 0:
        _emit(state, ctx, node_id, e_end)
        return
    stream, stream_key = _occurrence_stream(state, node_id, entry, e_end, path)
    rows = ctx.tables(node_id, e_end)
    child_of = ctx.child_map(node_id)
    vertices = node.vertices
    dst = ctx.graph.dst
    cur = entry
    t = 0
    while True:
        if t >= state.call_cap or state.budgets[node_id] <= 0:
            _emit(state, ctx, node_id, e_end)
            return
        f = _draw(rows, cur, stream, state.plan, stream_key, t)
        t += 1
        head = int(dst[f])
        child = child_of[cur]
        if head not in vertices:
            # the conditioned exit (or, unconditioned, the first stray exit)
            _expand(ctx, state, child, cur, f, depth_left - 1, path + (t - 1,))
            return
        state.budgets[node_id] -= 1
        state.jumps[node_id] = state.jumps.get(node_id, 0) + 1
        _expand(ctx, state, child, cur, f, depth_left - 1, path + (t - 1,))
        cur = head


def _fresh_budgets(hierarchy: Hierarchy, budget: int) -> dict:
    return {n.id: budget for n in hierarchy.nodes if not n.is_leaf}


def jumping_edges(graph: WeightedDigraph, hierarchy: Hierarchy, node_id: int,
                  v0: int, e_end: int | None, budget: int, plan: RandomnessPlan,
                  slot: int = 0, ctx: ExpansionContext | None = None,
                  strategy: str = "sequential") -> Transcript:
    """Transcript of the first ``budget`` edges jumping between children of a
    cluster, for the walk started at ``v0`` conditioned (when ``e_end`` is an
    edge) on leaving the cluster via ``e_end``.

    Children appear unexpanded. If the exit occurs within the budget the
    transcript ends with it; otherwise a terminal ``(node, e_end)`` marker is
    appended. ``strategy="doubling"`` reconstructs the same sequence through
    the end-table composition instead of a sequential scan.
    """
    ctx = ctx or ExpansionContext(graph, hierarchy)
    if strategy == "doubling":
        table, _ = build_end_table(graph, hierarchy, node_id, v0, e_end,
                                   budget, plan, slot, ctx=ctx)
        return _transcript_from_end_table(ctx, node_id, v0, e_end, budget, table)
    if strategy != "sequential":
        raise ValueError(f"unknown strategy {strategy!r}")
    state = _ExpState(plan=plan, budgets={node_id: budget}, call_cap=budget,
                      use_cache=False, cache_multiplicity=1, items=[])
    stream_key = ("ans", node_id, v0, e_end, slot)
    stream = plan.stream(*stream_key)
    rows = ctx.tables(node_id, e_end)
    child_of = ctx.child_map(node_id)
    node = ctx.hierarchy.nodes[node_id]
    cur = v0
    t = 0
    while True:
        if t >= budget:
            state.items.append((node_id, e_end))
            break
        f = _draw(rows, cur, stream, plan, stream_key, t)
        t += 1
        state.items.append((child_of[cur], f))
        head = int(graph.dst[f])
        if head not in node.vertices:
            break
        cur = head
    return Transcript(start=v0, items=state.items, hierarchy=hierarchy)


@dataclass
class EndTable:
    """Final-jump lookup: (start, t, l) -> last jumping edge of an l-step
    child-jump walk driven by variate indices t .. t+l-1.

    Starts are ("v", vertex) or ("e", edge); an edge start stands for the walk
    positioned at that edge's head, and an edge that has already left the
    cluster absorbs. Satisfies end(x, t, l) = end(end(x, t, l/2), t + l/2, l/2).
    """

    node: int
    budget: int
    entries: dict

    def lookup(self, start, t: int, l: int):
        return self.entries[(start, t, l)]


def build_end_table(graph: WeightedDigraph, hierarchy: Hierarchy, node_id: int,
                    v0: int, e_end: int | None, budget: int,
                    plan: RandomnessPlan, slot: int = 0,
                    ctx: ExpansionContext | None = None):
    """Materialize the doubling table for one jump-sequence call.

    Verification-scale: O((|S| + exits) * budget log budget) entries. The
    variates are the same indexed stream the sequential scan consumes, so both
    strategies realize one function of the task id.
    """
    ctx = ctx or ExpansionContext(graph, hierarchy)
    node = ctx.hierarchy.nodes[node_id]
    rows = ctx.tables(node_id, e_end)
    stream_key = ("ans", node_id, v0, e_end, slot)
    stream = plan.stream(*stream_key)
    xs = [stream.u64() for _ in range(budget)]

    def next_edge(vertex: int, t: int) -> int:
        sampler = rows[vertex]
        if sampler is None:
            raise ZeroConditioningError(f"walk from {vertex} cannot realize the exit edge")
        try:
            return sampler.draw_at(xs[t])
        except TieUnresolved:
            counter = iter(range(1 << 30))
            return sampler.draw_at(
                xs[t], lambda: plan.u64(*stream_key, "ext", t, next(counter)))

    starts = [("v", v) for v in sorted(node.vertices)]
    edge_starts = set()
    for v in sorted(node.vertices):
        sampler = rows[v]
        if sampler is not None:
            edge_starts.update(sampler.values)
    starts += [("e", e) for e in sorted(edge_starts)]

    def position(start):
        """Vertex the walk stands at, or None if absorbed outside the node."""
        if start[0] == "v":
            return start[1]
        head = int(graph.dst[start[1]])
        return head if head in node.vertices else None

    entries: dict = {}
    for t in range(budget):
        for start in starts:
            pos = position(start)
            if pos is None:
                entries[(start, t, 1)] = start[1]
            else:
                entries[(start, t, 1)] = next_edge(pos, t)
    l = 2
    while l <= budget:
        for t in range(budget - l + 1):
            for start in starts:
                half = entries[(start, t, l // 2)]
                entries[(start, t, l)] = entries[(("e", half), t + l // 2, l // 2)]
        l *= 2
    return EndTable(node=node_id, budget=budget, entries=entries), xs


def _transcript_from_end_table(ctx: ExpansionContext, node_id: int, v0: int,
                               e_end: int | None, budget: int,
                               table: EndTable) -> Transcript:
    node = ctx.hierarchy.nodes[node_id]
    child_of = ctx.child_map(node_id)
    items = []
    cur = v0
    for l in range(1, budget + 1):
        # edge at step l via binary decomposition of l
        start, t = ("v", v0), 0
        rem = l
        p = 1 << (budget.bit_length())
        while rem:
            if p <= rem:
                start, t, rem = ("e", table.lookup(start, t, p)), t + p, rem - p
            p //= 2
        edge = start[1]
        items.append((child_of[cur], edge))
        head = int(ctx.graph.dst[edge])
        if head not in node.vertices:
            break
        cur = head
    else:
        items.append((node_id, e_end))
    return Transcript(start=v0, items=items, hierarchy=ctx.hierarchy)


def all_edges(graph: WeightedDigraph, hierarchy: Hierarchy, node_id: int,
              v: int, e_end: int | None, budget: int, depth: int,
              plan: RandomnessPlan, use_cache: bool = True,
              cache_multiplicity: int | None = None,
              ctx: ExpansionContext | None = None) -> Transcript:
    """Expand the walk in a cluster down to relative depth ``depth``.

    ``depth=1`` reproduces :func:`jumping_edges`; larger depths splice child
    expansions in place of intermediate clusters, each child charged against
    its own global jumping-edge budget, with exhausted or too-deep clusters
    left as opaque markers.
    """
    ctx = ctx or ExpansionContext(graph, hierarchy)
    state = _ExpState(plan=plan, budgets=_fresh_budgets(hierarchy, budget),
                      call_cap=budget, use_cache=use_cache,
                      cache_multiplicity=cache_multiplicity or default_cache_multiplicity(budget),
                      items=[])
    _expand(ctx, state, node_id, v, e_end, depth, ())
    return Transcript(start=v, items=state.items, hierarchy=hierarchy)


@dataclass
class SampleStats:
    root: int
    retries: int = 0
    transcript_length: int = 0
    max_node_usage: int = 0
    collisions: int = 0
    duplicate_answer_uses: int = 0
    budget: int = 0
    sequential_steps: int = 0


class ArborescenceSampler:
    """Reusable sampler for one graph; per-root pipeline state is cached."""

    def __init__(self, graph: WeightedDigraph, mode: str = "hierarchical",
                 budget: int | None = None, cache_multiplicity: int | None = None,
                 safety: int = DEFAULT_SAFETY, max_retries: int = DEFAULT_MAX_RETRIES):
        if mode not in ("hierarchical", "fresh", "sequential"):
            raise ValueError(f"unknown mode {mode!r}")
        check_walkable(graph)
        self.graph = graph
        self.mode = mode
        self.budget_override = budget
        self.cache_multiplicity = cache_multiplicity
        self.safety = safety
        self.max_retries = max_retries
        self._lock = threading.Lock()
        self._root_sampler = CategoricalSampler(
            list(range(graph.n)), root_distribution(graph))
        self._root_state: dict = {}
        self._reversal_tables = None
        sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * graph.n + 1000))

    # -- shared -----------------------------------------------------------

    def _draw_root(self, plan: RandomnessPlan) -> int:
        return self._root_sampler.draw(plan.stream("root"))

    def sample(self, seed: int, root: int | None = None,
               record_transcript: bool = False):
        trees, stats, transcripts = self._run(seed, 1, root, 1, record_transcript)
        if record_transcript:
            return trees[0], stats[0], transcripts[0]
        return trees[0], stats[0]

    def sample_many(self, seed: int, n_samples: int, root: int | None = None,
                    workers: int | None = None):
        if workers is None:
            workers = int(os.environ.get("ARBSAMPLE_WORKERS", "1"))
        trees, stats, _ = self._run(seed, n_samples, root, max(workers, 1), False)
        return trees, stats

    def _run(self, seed, n_samples, root, workers, record):
        base = RandomnessPlan(seed)

        def one(i):
            plan = base.subplan("sample", i)
            if self.mode == "sequential":
                return self._sequential_sample(plan, root, record)
            return self._hierarchical_sample(plan, root, record)

        if workers > 1 and n_samples > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one, range(n_samples)))
        else:
            results = [one(i) for i in range(n_samples)]
        trees = [r[0] for r in results]
        stats = [r[1] for r in results]
        transcripts = [r[2] for r in results]
        return trees, stats, transcripts

    # -- hierarchical pipeline --------------------------------------------

    def _root_pipeline(self, root: int):
        got = self._root_state.get(root)
        if got is None:
            with self._lock:
                got = self._root_state.get(root)
                if got is None:
                    reduction = reduce(self.graph, root)
                    walk_graph = reverse_graph(reduction.eulerian_graph)
                    hierarchy = build_hierarchy(walk_graph)
                    ctx = ExpansionContext(walk_graph, hierarchy)
                    base_budget = self.budget_override or choose_budget(
                        walk_graph.n, walk_graph.m, self.safety)
                    got = (reduction, walk_graph, hierarchy, ctx, base_budget)
                    self._root_state[root] = got
        return got

    def _hierarchical_sample(self, plan: RandomnessPlan, root: int | None,
                             record: bool):
        r = self._draw_root(plan) if root is None else root
        reduction, walk_graph, hierarchy, ctx, base_budget = self._root_pipeline(r)
        n = self.graph.n
        use_cache = self.mode == "hierarchical"
        for attempt in range(self.max_retries + 1):
            budget = base_budget * (2 ** attempt)
            m_mult = self.cache_multiplicity or default_cache_multiplicity(budget)
            state = _ExpState(plan=plan.subplan("attempt", attempt),
                              budgets=_fresh_budgets(hierarchy, budget),
                              call_cap=budget, use_cache=use_cache,
                              cache_multiplicity=m_mult,
                              items=[] if record else None,
                              visited={r}, target=n)
            try:
                _expand(ctx, state, hierarchy.root, r, None, 2 * n + 2, ())
            except _Done:
                pass
            except _CoverageFail:
                continue
            if len(state.visited) < n:
                continue
            dup = sum(1 for c in state.answer_uses.values() if c > 1)
            stats = SampleStats(
                root=r, retries=attempt,
                transcript_length=state.transcript_len,
                max_node_usage=max(state.jumps.values(), default=0),
                collisions=state.collisions,
                duplicate_answer_uses=dup,
                budget=budget)
            tree = self._tree_from_first_visits(r, reduction, state.first_visit)
            transcript = (Transcript(start=r, items=state.items, hierarchy=hierarchy)
                          if record else None)
            return tree, stats, transcript
        raise CoverageFailureError(
            f"no certified cover after {self.max_retries + 1} attempts "
            f"(root {r}, base budget {base_budget})")

    def _tree_from_first_visits(self, root, reduction, first_visit) -> Arborescence:
        m_orig = self.graph.m
        parent = {}
        for v, e in first_visit.items():
            if e >= m_orig:
                raise AssertionError("patch edge appeared as a first-visit edge")
            parent[v] = e   # flip of walk edge e is the original edge e = (v, ...)
        return Arborescence(root=root, parent_edge=parent)

    # -- sequential baseline ----------------------------------------------

    def _reversal(self):
        if self._reversal_tables is None:
            with self._lock:
                if self._reversal_tables is None:
                    g = self.graph
                    pi = stationary_distribution(g)
                    tables = []
                    for v in range(g.n):
                        ids = list(g.in_edges[v])
                        if not ids:
                            raise InvalidGraphError(
                                f"vertex {v} unreachable: no incoming edge")
                        probs = [pi[int(g.src[e])] * g.weight[e] / g.out_weight[int(g.src[e])]
                                 for e in ids]
                        tables.append(CategoricalSampler(ids, probs))
                    self._reversal_tables = tables
        return self._reversal_tables

    def _sequential_sample(self, plan: RandomnessPlan, root: int | None,
                           record: bool):
        r = self._draw_root(plan) if root is None else root
        tables = self._reversal()
        g = self.graph
        stream = plan.stream("walk")
        visited = {r}
        parent: dict = {}
        cur = r
        steps = 0
        n = g.n
        while len(visited) < n:
            e = tables[cur].draw(stream)
            steps += 1
            nxt = int(g.src[e])   # walking the flipped edge e = (nxt, cur)
            if nxt not in visited:
                visited.add(nxt)
                parent[nxt] = e
            cur = nxt
        stats = SampleStats(root=r, sequential_steps=steps,
                            transcript_length=steps)
        return Arborescence(root=r, parent_edge=parent), stats, None


def sample_arborescence(graph: WeightedDigraph, seed: int, root: int | None = None,
                        mode: str = "hierarchical", budget: int | None = None,
                        cache_multiplicity: int | None = None) -> Arborescence:
    """One arborescence with P(T) ∝ Π edge weights (see ArborescenceSampler)."""
    sampler = ArborescenceSampler(graph, mode=mode, budget=budget,
                                  cache_multiplicity=cache_multiplicity)
    tree, _ = sampler.sample(seed, root=root)
    return tree


def sequential_aldous_broder(graph: WeightedDigraph, seed: int,
                             root: int | None = None) -> Arborescence:
    """Baseline sampler: time-reversed walk to cover time, same output law."""
    sampler = ArborescenceSampler(graph, mode="sequential")
    tree, _ = sampler.sample(seed, root=root)
    return tree
