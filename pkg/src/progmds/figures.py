"""Plot-ready figure rendering for run and benchmark outputs.

Every function writes a PNG next to the delimited output files and returns
the path. matplotlib is imported lazily with the Agg backend so the library
itself never needs a display.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

__all__ = [
    "save_stress_figure",
    "save_embedding_figure",
    "save_shepard_figure",
    "save_runtime_figure",
    "save_overlap_figure",
    "save_order_figure",
]

_DPI = 150


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _finish(fig, out_path) -> Path:
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=_DPI, bbox_inches="tight")
    _plt().close(fig)
    return out_path


def save_stress_figure(summary_rows, trace_rows, out_path) -> Path:
    """Left: full normalized stress per progression step. Right: raw and
    smoothed sparse-stress samples over all iterations."""
    plt = _plt()
    fig, (ax_step, ax_iter) = plt.subplots(1, 2, figsize=(10, 4))

    steps = [r["step"] for r in summary_rows]
    full = [r["full_normalized_stress"] for r in summary_rows]
    known = [(s, f) for s, f in zip(steps, full) if f is not None and not math.isnan(f)]
    if known:
        ax_step.plot([s for s, _ in known], [f for _, f in known], "o-", ms=3)
    ax_step.set_xlabel("progression step")
    ax_step.set_ylabel("full normalized stress")
    ax_step.set_title("stress over steps")

    if trace_rows:
        raw = np.array([r[2] for r in trace_rows])
        smoothed = np.array([r[3] for r in trace_rows])
        xs = np.arange(1, len(raw) + 1)
        ax_iter.plot(xs, raw, lw=0.6, alpha=0.45, label="raw")
        ok = ~np.isnan(smoothed)
        ax_iter.plot(xs[ok], smoothed[ok], lw=1.4, label="smoothed")
        ax_iter.set_xlabel("iteration (all steps)")
        ax_iter.set_ylabel("sparse stress sample")
        ax_iter.set_title("per-iteration samples")
        ax_iter.legend(fontsize=8)
    fig.tight_layout()
    return _finish(fig, out_path)


def save_embedding_figure(positions, out_path, title: str = "embedding") -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(positions[:, 0], positions[:, 1], s=4, alpha=0.6, linewidths=0)
    ax.set_aspect("equal")
    ax.set_title(title)
    ax.set_xticks([])
    ax.set_yticks([])
    return _finish(fig, out_path)


def save_shepard_figure(high, low, out_path) -> Path:
    """Scatter of high- vs low-dimensional pair distances; the diagonal marks
    a perfectly faithful embedding."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(high, low, s=3, alpha=0.35, linewidths=0)
    limit = max(float(np.max(high, initial=1.0)), float(np.max(low, initial=1.0)))
    ax.plot([0, limit], [0, limit], "k--", lw=0.8)
    ax.set_xlabel("high-dimensional distance")
    ax.set_ylabel("embedding distance")
    ax.set_title("Shepard diagram")
    return _finish(fig, out_path)


def save_runtime_figure(step_durations_s, batch_total_s, out_path) -> Path:
    """Per-step progressive wall-clock against the batch total."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = np.arange(len(step_durations_s))
    ax.bar(xs, step_durations_s, width=0.8, label="progressive step")
    ax.axhline(batch_total_s, color="C3", lw=1.2, ls="--", label="batch total")
    ax.set_xlabel("progression step")
    ax.set_ylabel("wall-clock [s]")
    ax.set_title("runtime per step vs batch")
    ax.legend(fontsize=8)
    return _finish(fig, out_path)


def save_overlap_figure(change_pcts, ratios_by_pct, out_path) -> Path:
    """Stress ratio (sliding / fresh batch) against the per-step change
    percentage; one marker per seed plus the median line."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    medians = []
    for pct in change_pcts:
        ratios = ratios_by_pct[pct]
        ax.scatter([pct] * len(ratios), ratios, s=14, alpha=0.5, color="C0")
        medians.append(float(np.median(ratios)))
    ax.plot(change_pcts, medians, "o-", color="C1", label="median")
    ax.axhline(1.0, color="k", lw=0.8, ls=":")
    ax.set_xlabel("changed dimensions per step [%]")
    ax.set_ylabel("stress ratio vs fresh batch")
    ax.set_title("sliding-window quality vs change rate")
    ax.legend(fontsize=8)
    return _finish(fig, out_path)


def save_order_figure(curves, out_path) -> Path:
    """Median stress-over-steps curves for each chunk ordering.

    curves: mapping order-name -> list of (step, stress) medians.
    """
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, points in curves.items():
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        ax.plot(xs, ys, lw=1.4, label=name)
    ax.set_xlabel("progression step")
    ax.set_ylabel("full normalized stress")
    ax.set_title("dimension order comparison")
    ax.legend(fontsize=8)
    return _finish(fig, out_path)
