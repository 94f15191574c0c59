"""Figure rendering for verification reports."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def write_verification_figures(outdir: str, labels, expected, observed,
                               n_samples: int) -> list[str]:
    """Render the empirical-vs-exact tree distribution as a bar chart.

    ``expected`` are exact probabilities, ``observed`` raw counts; both are
    aligned with ``labels``. Returns the written file paths.
    """
    os.makedirs(outdir, exist_ok=True)
    paths = []
    order = sorted(range(len(labels)), key=lambda i: -expected[i])
    xs = range(len(order))
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(order)), 4))
    ax.bar([x - 0.2 for x in xs], [expected[i] for i in order],
           width=0.4, label="exact", color="#31708f")
    ax.bar([x + 0.2 for x in xs], [observed[i] / n_samples for i in order],
           width=0.4, label="observed", color="#f0ad4e")
    ax.set_xlabel("arborescence (sorted by exact probability)")
    ax.set_ylabel("probability")
    ax.set_title(f"tree distribution, {n_samples} samples")
    ax.legend()
    if len(order) > 25:
        ax.set_xticks([])
    fig.tight_layout()
    path = os.path.join(outdir, "distribution.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    resid = [observed[i] / n_samples - expected[i] for i in order]
    ax.bar(list(xs), resid, color="#5cb85c")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("arborescence (same order)")
    ax.set_ylabel("observed - exact")
    ax.set_title("per-tree residuals")
    if len(order) > 25:
        ax.set_xticks([])
    fig.tight_layout()
    path = os.path.join(outdir, "residuals.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)
    return paths
