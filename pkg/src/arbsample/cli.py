"""Command-line front end.

Subcommands: ``sample``, ``count``, ``inspect``, ``verify``. Data goes to
stdout, diagnostics to stderr. Exit codes: 0 ok, 2 parse error, 3 unreachable
or unwalkable input, 4 coverage failure, 5 instance too large for an exact
operation. All randomized commands are reproducible from --seed alone; the
ARBSAMPLE_WORKERS environment variable only changes how samples are spread
over threads, never the output.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .errors import (ArbsampleError, CoverageFailureError, GraphFormatError,
                     InvalidGraphError, TooLargeError, UnreachableVertexError)
from .graphio import format_weight, load_graph
from .graphs import is_eulerian, reverse_graph
from .hierarchy import build_hierarchy
from .oracle import count_arborescences, distribution_report, full_catalog
from .randomness import RandomnessPlan
from .reduction import reduce, root_distribution, sample_root
from .sampler import ArborescenceSampler
from .walks import stationary_distribution

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNREACHABLE = 3
EXIT_COVERAGE = 4
EXIT_TOO_LARGE = 5

ORACLE_LIMIT = 8


def _eulerian_residual(graph) -> float:
    res = 0.0
    for v in range(graph.n):
        i, o = graph.in_weight[v], graph.out_weight[v]
        res = max(res, abs(i - o) / max(abs(i), abs(o), 1e-300))
    return res


def _resolve_root(graph, args) -> int:
    if getattr(args, "root", None) is not None:
        if not (0 <= args.root < graph.n):
            raise InvalidGraphError(f"root {args.root} out of range")
        return args.root
    plan = RandomnessPlan(getattr(args, "seed", 0))
    return sample_root(graph, plan.stream("root"))


def cmd_sample(args) -> int:
    graph = load_graph(args.graph)
    sampler = ArborescenceSampler(graph, mode=args.mode, budget=args.budget,
                                  cache_multiplicity=args.cache,
                                  max_retries=args.max_retries)
    trees, _ = sampler.sample_many(args.seed, args.samples, root=args.root)
    for tree in trees:
        print(tree.to_line(graph))
    return EXIT_OK


def cmd_count(args) -> int:
    graph = load_graph(args.graph)
    total = count_arborescences(graph, args.root)
    print(format_weight(total))
    return EXIT_OK


def cmd_inspect(args) -> int:
    graph = load_graph(args.graph)
    if args.stage == "reduce":
        root = _resolve_root(graph, args)
        result = reduce(graph, root)
        q = root_distribution(graph)
        pi = stationary_distribution(graph)
        print(f"root: {root}")
        print("root law: " + " ".join(f"{x:.6g}" for x in q))
        print("stationary: " + " ".join(f"{x:.6g}" for x in pi))
        print(f"patch edges: {len(result.patch_edges)}")
        for e in result.patch_edges:
            g2 = result.eulerian_graph
            print(f"  patch {int(g2.src[e])}->{int(g2.dst[e])}")
        print(f"eulerian residual: {_eulerian_residual(result.eulerian_graph):.3g}")
        return EXIT_OK
    if is_eulerian(graph):
        print("input is eulerian; hierarchy of the input graph")
        hierarchy = build_hierarchy(graph)
    else:
        root = _resolve_root(graph, args)
        result = reduce(graph, root)
        print(f"input is not eulerian; hierarchy of the reduced walk graph (root {root})")
        hierarchy = build_hierarchy(reverse_graph(result.eulerian_graph))
    sys.stdout.write(hierarchy.format_tree())
    return EXIT_OK


def cmd_verify(args) -> int:
    graph = load_graph(args.graph)
    if graph.n > ORACLE_LIMIT:
        raise TooLargeError(f"verify guard: n={graph.n} > {ORACLE_LIMIT}")
    catalogs = full_catalog(graph)
    sampler = ArborescenceSampler(graph, mode=args.mode, budget=args.budget,
                                  max_retries=args.max_retries)
    trees, stats = sampler.sample_many(args.seed, args.samples)
    report = distribution_report(trees, catalogs)
    counts: dict = {}
    for tree in trees:
        k = tree.to_key_line(graph)
        counts[k] = counts.get(k, 0) + 1
    payload = {
        "schema": "1",
        "graph": os.path.basename(args.graph),
        "mode": args.mode,
        "seed": args.seed,
        "n_samples": args.samples,
        "tv": round(report.tv_distance, 6),
        "chi_square_p": report.chi_square_p,
        "per_tree_counts": dict(sorted(counts.items())),
        "retries": int(sum(s.retries for s in stats)),
        "mean_budget_used": float(np.mean([s.max_node_usage for s in stats]))
        if args.mode != "sequential" else float(np.mean([s.sequential_steps for s in stats])),
    }
    text = json.dumps(payload, sort_keys=True, indent=2)
    print(text)
    if args.report_dir:
        _write_report_files(args.report_dir, graph, catalogs, trees, payload)
    return EXIT_OK


def _write_report_files(outdir, graph, catalogs, trees, payload) -> None:
    from .figures import write_verification_figures
    from .oracle import joint_probabilities

    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    probs = joint_probabilities(catalogs)
    observed: dict = {}
    for tree in trees:
        observed[tree.key()] = observed.get(tree.key(), 0) + 1
    by_key = {}
    for c in catalogs.values():
        for tree, _ in c.entries:
            by_key[tree.key()] = tree
    labels, expected, counts = [], [], []
    for k in sorted(probs, key=lambda k: (-probs[k], k)):
        labels.append(by_key[k].to_key_line(graph))
        expected.append(float(probs[k]))
        counts.append(observed.get(k, 0))
    with open(os.path.join(outdir, "per_tree_counts.csv"), "w",
              encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tree", "exact_probability", "observed_count"])
        for row in zip(labels, expected, counts):
            writer.writerow(row)
    write_verification_figures(outdir, labels, expected, counts,
                               n_samples=len(trees))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arbsample",
        description="Sample, count, and verify random arborescences of weighted digraphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample arborescences")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--root", type=int, default=None)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--mode", choices=["hierarchical", "sequential"],
                   default="hierarchical")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--cache", type=int, default=None)
    p.add_argument("--max-retries", type=int, default=20)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("count", help="exact total arborescence weight for a root")
    p.add_argument("--graph", required=True)
    p.add_argument("--root", type=int, required=True)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("inspect", help="inspect pipeline stages")
    p.add_argument("--graph", required=True)
    p.add_argument("--stage", choices=["reduce", "hierarchy"], required=True)
    p.add_argument("--root", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("verify", help="statistical verification against the exact law")
    p.add_argument("--graph", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=["hierarchical", "sequential"],
                   default="hierarchical")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--max-retries", type=int, default=20)
    p.add_argument("--report-dir", default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GraphFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UnreachableVertexError, InvalidGraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except CoverageFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COVERAGE
    except TooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except ArbsampleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
