"""Figure rendering for run and comparison reports.

Everything draws through the Agg backend straight to files; nothing here
opens a window. Figures are deliberately plain: coverage over budget,
the approach-angle histogram with its cone limit marked, and two
projections of the voxelized robustness map.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

COVERAGE_FIGURE = "coverage.png"
NU_FIGURE = "nu_hist.png"
HEATMAP_FIGURE = "heatmap.png"


def save_coverage_figure(curves: dict, path, budget: int | None = None) -> None:
    """Step curves of reference coverage against evaluation index."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, curve in curves.items():
        xs = [p[0] for p in curve]
        ys = [p[1] for p in curve]
        if budget is not None and xs and xs[-1] < budget:
            xs = xs + [budget]
            ys = ys + [ys[-1]]
        ax.step(xs, ys, where="post", label=label, linewidth=1.2)
    ax.set_xlabel("evaluations")
    ax.set_ylabel("coverage of reference set")
    ax.set_ylim(bottom=0.0)
    if len(curves) > 1:
        ax.legend(fontsize=7, loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_nu_figure(mass: np.ndarray, edges: np.ndarray, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.bar(edges[:-1], mass, width=np.diff(edges), align="edge", color="#3b6ea5")
    ax.axvline(np.pi / 4, color="#c0392b", linestyle="--", linewidth=1.0)
    ax.text(np.pi / 4, ax.get_ylim()[1] * 0.95, " pi/4", color="#c0392b", va="top", fontsize=8)
    ax.set_xlim(0.0, np.pi)
    ax.set_xlabel("angle between approach axis and surface normal (rad)")
    ax.set_ylabel("probability mass")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_heatmap_figure(heatmap: dict, step: float, path) -> None:
    """Top (x-y) and side (x-z) views; each shown voxel carries the max
    fitness over the collapsed axis."""
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.6))
    if not heatmap:
        for ax in axes:
            ax.text(0.5, 0.5, "no successful grasps", ha="center", va="center")
            ax.set_axis_off()
        fig.savefig(path, dpi=130)
        plt.close(fig)
        return
    coords = np.array(sorted(heatmap), float) * step
    values = np.array([heatmap[k] for k in sorted(heatmap)])
    vmax = values.max() if len(values) else 1.0
    for ax, (i, j), title in zip(axes, ((0, 1), (0, 2)), ("top (x-y)", "side (x-z)")):
        flat: dict[tuple, float] = {}
        for (a, b), f in zip(coords[:, [i, j]], values):
            key = (a, b)
            flat[key] = max(flat.get(key, -np.inf), f)
        pts = np.array(list(flat))
        sc = ax.scatter(
            pts[:, 0], pts[:, 1], c=list(flat.values()), s=18, marker="s",
            cmap="inferno", vmin=0.0, vmax=vmax,
        )
        ax.set_title(title, fontsize=9)
        ax.set_aspect("equal")
        ax.set_xlabel("m")
    fig.colorbar(sc, ax=axes, label="max fitness", shrink=0.85)
    fig.savefig(path, dpi=130)
    plt.close(fig)
