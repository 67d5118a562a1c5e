"""Matplotlib renderings of experiment outputs, written to PNG files.

Everything here works from plain arrays so figures can be redrawn from the
CSV files of an earlier run.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}

INDUCING_COLOR = "tab:blue"
TARGET_COLOR = "tab:orange"


def _grid_figsize(shape, base=4.0):
    rows, cols = shape
    aspect = rows / cols
    if aspect >= 1:
        return (max(base / aspect, 1.6) + 1.0, base)
    return (base + 1.0, max(base * aspect, 1.6))


def plot_heatmap(grid, path, title: str = "", log: bool = False, floor: float = 1e-6,
                 cmap: str = "viridis", marks: Optional[Mapping[str, Sequence]] = None):
    """Draw one grid as an image, optionally on a log colour scale.

    ``marks`` maps a label to a list of ``(row, col)`` cells to outline.
    """
    grid = np.asarray(grid, dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=_grid_figsize(grid.shape))
        if log:
            shown = np.maximum(grid, floor)
            norm = LogNorm(vmin=shown.min(), vmax=max(shown.max(), shown.min() * 10))
            im = ax.imshow(shown, cmap=cmap, norm=norm, interpolation="nearest")
        else:
            im = ax.imshow(grid, cmap=cmap, interpolation="nearest")
        fig.colorbar(im, ax=ax, shrink=0.8)
        for (label, cells), color in zip((marks or {}).items(), ("white", "magenta", "red")):
            for k, (r, c) in enumerate(cells):
                ax.add_patch(plt.Rectangle((c - 0.5, r - 0.5), 1, 1, fill=False, lw=1.2,
                                           ec=color, label=label if k == 0 else None))
        if marks:
            ax.legend(loc="upper right", framealpha=0.6)
        ax.set_title(title)
        ax.set_xlabel("column")
        ax.set_ylabel("row")
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_learning_curves(mean_curves, std_curves, tracked_cells, path, title: str = ""):
    """Inducing-cell value (first tracked cell) against every target cell, mean ± std."""
    mean_curves = np.asarray(mean_curves)
    std_curves = np.asarray(std_curves)
    t = np.arange(1, mean_curves.shape[0] + 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        for k in range(mean_curves.shape[1] - 1, -1, -1):
            inducing = k == 0
            color = INDUCING_COLOR if inducing else TARGET_COLOR
            label = None
            if inducing:
                label = f"inducing {tuple(tracked_cells[0])}"
            elif k == 1:
                label = "potential targets"
            m, s = mean_curves[:, k], std_curves[:, k]
            ax.fill_between(t, m - s, m + s, color=color, alpha=0.15 if inducing else 0.05, lw=0)
            ax.plot(t, m, color=color, lw=1.4 if inducing else 0.6, label=label)
        ax.set_xlabel("timestep")
        ax.set_ylabel("estimated value V")
        ax.set_title(title)
        ax.legend(loc="upper left")
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_target_visit_bars(names, means, stds, path, firsts=None, title: str = ""):
    """Bar chart of mean target visits per experiment; ``firsts`` adds a stacked first-visit bar."""
    x = np.arange(len(names))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(1.2 * len(names) + 1.5, 3.5))
        ax.bar(x, means, yerr=stds, color="navajowhite", edgecolor="darkorange", capsize=3,
               label="all visits")
        if firsts is not None:
            ax.bar(x, firsts, color="darkorange", label="first visits")
        for xi, m in zip(x, means):
            ax.annotate(f"{m:.1f}", (xi, m), textcoords="offset points", xytext=(0, 3),
                        ha="center", fontsize=7)
        ax.set_yscale("symlog", linthresh=10)
        ax.set_xticks(x)
        ax.set_xticklabels([n.replace("primary-", "") for n in names], rotation=30, ha="right")
        ax.set_ylabel("visits to generated targets")
        ax.set_title(title)
        ax.legend(loc="upper left")
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_target_visit_histogram(per_trial, path, title: str = ""):
    per_trial = np.asarray(per_trial, dtype=int)
    bins = np.arange(0, max(per_trial.max(initial=0), 1) + 2) - 0.5
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3))
        ax.hist(per_trial, bins=bins, color="darkorange", edgecolor="black")
        ax.set_xlabel("target visits in trial")
        ax.set_ylabel("trials")
        ax.set_title(title)
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def render_run(out_dir, mean_v, mean_visits, mean_curves, std_curves, tracked_cells,
               label: str = "", example_v=None, example_visits=None) -> list[Path]:
    """Standard PNG set for one experiment directory."""
    out = Path(out_dir)
    marks = {"inducing": [tracked_cells[0]], "targets": list(tracked_cells[1:])}
    paths = [
        plot_heatmap(mean_v, out / "v_final.png", f"{label} mean final V", marks=marks),
        plot_heatmap(mean_visits, out / "visits.png", f"{label} mean visit counts", cmap="magma"),
        plot_heatmap(mean_v, out / "v_final_log.png", f"{label} mean final V (log)", log=True),
        plot_heatmap(mean_visits, out / "visits_log.png", f"{label} mean visits (log)",
                     log=True, floor=1e-2, cmap="magma"),
        plot_learning_curves(mean_curves, std_curves, tracked_cells, out / "curves.png",
                             f"{label} value over time"),
    ]
    if example_v is not None:
        paths.append(plot_heatmap(example_v, out / "trial0_v_final.png", f"{label} trial 0 final V",
                                  marks=marks))
    if example_visits is not None:
        paths.append(plot_heatmap(example_visits, out / "trial0_visits.png",
                                  f"{label} trial 0 visits", cmap="magma"))
    return paths
