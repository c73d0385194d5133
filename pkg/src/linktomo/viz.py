"""Campaign report figures, rendered next to the CSV output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvaluationRecord, InstanceResult


def save_campaign_figures(
    records: list[EvaluationRecord],
    instances: list[InstanceResult],
    out_base: str,
) -> list[str]:
    """Write the solver-timing and path-shape figures; returns file paths."""
    written = []
    gated = [r for r in instances if r.gate and r.error is None]

    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    families = [rec.family for rec in records]
    xs = range(len(families))
    if gated:
        for i, fam in enumerate(families):
            pts = [r for r in gated if r.family == fam]
            ax.scatter(
                [i - 0.12] * len(pts),
                [r.t_structured_ms for r in pts],
                s=14,
                alpha=0.5,
                color="tab:blue",
            )
            ax.scatter(
                [i + 0.12] * len(pts),
                [r.t_dense_ms for r in pts],
                s=14,
                alpha=0.5,
                color="tab:red",
            )
    ax.plot(
        [i - 0.12 for i in xs],
        [rec.t_structured_ms for rec in records],
        "_",
        markersize=22,
        color="tab:blue",
        label="structured solve",
    )
    ax.plot(
        [i + 0.12 for i in xs],
        [rec.t_dense_ms for rec in records],
        "_",
        markersize=22,
        color="tab:red",
        label="dense solve",
    )
    ax.set_xticks(list(xs), families)
    ax.set_yscale("log")
    ax.set_ylabel("solve time (ms)")
    ax.set_xlabel("graph family")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = f"{out_base}_timing.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(1, 2, figsize=(7.5, 3.2))
    axes[0].bar(xs, [rec.n_bar for rec in records], color="tab:gray")
    axes[0].set_xticks(list(xs), families)
    axes[0].set_ylabel("mean links (= paths)")
    if gated:
        for i, fam in enumerate(families):
            pts = [r.h_mean for r in gated if r.family == fam]
            axes[1].scatter([i] * len(pts), pts, s=14, alpha=0.5, color="tab:green")
    axes[1].plot(xs, [rec.h_bar for rec in records], "_", markersize=22, color="black")
    axes[1].set_xticks(list(xs), families)
    axes[1].set_ylabel("mean path hops")
    for ax_ in axes:
        ax_.set_xlabel("graph family")
    fig.tight_layout()
    path = f"{out_base}_paths.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written
