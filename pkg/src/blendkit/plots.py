"""Figure rendering for harness reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import SweepReport


def render_sweep_figure(report: SweepReport, path: str) -> None:
    """Quality and realized cost vs budget fraction, saved to file."""
    fracs = [r.fraction for r in report.rows]
    realized = [r.mean_realized_quality for r in report.rows]
    sizes = [r.mean_selected_size for r in report.rows]
    ratios = [r.mean_cost_ratio for r in report.rows]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(fracs, realized, "o-", color="tab:blue")
    ax1.set_xlabel("budget fraction")
    ax1.set_ylabel("mean realized quality (proxy)")
    ax1.set_title("quality vs budget")
    ax1.grid(True, alpha=0.3)

    ax2.plot(fracs, ratios, "s-", color="tab:orange", label="cost ratio")
    ax2.plot(fracs, fracs, "--", color="gray", label="budget line")
    ax2.set_xlabel("budget fraction")
    ax2.set_ylabel("mean realized cost / baseline")
    ax2.set_title(f"selected size: {sizes[0]:.2f} → {sizes[-1]:.2f}")
    ax2.legend()
    ax2.grid(True, alpha=0.3)

    fig.suptitle(report.metadata.get("dataset_id", ""))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_compare_figure(table: dict, path: str) -> None:
    """Bar chart of mean realized proxy per strategy."""
    means = table["means"]
    names = list(means)
    values = [means[n] for n in names]
    fig, ax = plt.subplots(figsize=(max(6, 0.9 * len(names)), 4))
    colors = [
        "tab:green" if n.startswith("knapsack") else
        "tab:gray" if n == "random" else "tab:blue"
        for n in names
    ]
    ax.bar(range(len(names)), values, color=colors)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("mean realized quality (proxy)")
    ax.set_title(f"strategies at budget fraction {table['fraction']}")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
