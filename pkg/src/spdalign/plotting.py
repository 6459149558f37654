"""Matplotlib figures for evaluation reports.

Figures are built on :class:`matplotlib.figure.Figure` directly, so no
pyplot state or interactive backend is involved, and PNGs are written
without a software/date stamp to keep reruns byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
}
GCA_COLORS = {
    "GCA1": "#1f77b4",
    "GCA2": "#2ca02c",
    "GCA3": "#9467bd",
    "Cascaded-GCA2": "#17becf",
    "Cascaded-GCA3": "#8c564b",
}
REFERENCE_COLOR = "#d62728"
METHOD_COLORS = {
    "NA": "#7f7f7f",
    "CORAL": REFERENCE_COLOR,
    "SA": "#ff7f0e",
    "B-S": "#bcbd22",
    "B-T": "#e377c2",
    **GCA_COLORS,
}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata={"Software": None})
    return path


def _new_figure(width=6.0, height=3.6):
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(width, height), layout="constrained")
        ax = fig.add_subplot()
    ax.tick_params(labelsize=STYLE["font.size"])
    ax.xaxis.label.set_size(STYLE["axes.labelsize"])
    ax.yaxis.label.set_size(STYLE["axes.labelsize"])
    return fig, ax


def plot_method_accuracies(reports, path):
    """Bar chart of best mean accuracy (+- std) per method, one group per task."""
    tasks = sorted({r.task.label for r in reports})
    methods = []
    for r in reports:
        if r.method not in methods:
            methods.append(r.method)
    best = {}
    for r in reports:
        key = (r.task.label, r.method)
        if key not in best or r.mean_accuracy > best[key].mean_accuracy:
            best[key] = r
    fig, ax = _new_figure(max(6.0, 1.2 * len(tasks) * max(1, len(methods)) / 3))
    width = 0.8 / len(methods)
    x = np.arange(len(tasks))
    for i, m in enumerate(methods):
        means = [best[(t, m)].mean_accuracy if (t, m) in best else np.nan for t in tasks]
        stds = [best[(t, m)].std_accuracy if (t, m) in best else 0.0 for t in tasks]
        ax.bar(x + (i - (len(methods) - 1) / 2) * width, means, width, yerr=stds,
               capsize=2, label=m, color=METHOD_COLORS.get(m))
    ax.set_xticks(x, tasks)
    ax.set_ylabel("target accuracy (%)")
    ax.legend(fontsize=7, ncols=min(len(methods), 5))
    return _save(fig, path)


def plot_sweep_heatmap(reports, method, path, reference=None):
    """Mean accuracy over the (t, gamma) grid for one method and task."""
    rows = [r for r in reports if r.method == method]
    if not rows:
        return None
    ts = sorted({r.params.t for r in rows})
    gs = sorted({r.params.gamma for r in rows})
    grid = np.full((len(gs), len(ts)), np.nan)
    for r in rows:
        i, j = gs.index(r.params.gamma), ts.index(r.params.t)
        grid[i, j] = np.fmax(grid[i, j], r.mean_accuracy)
    fig, ax = _new_figure(5.0, 4.0)
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(ts)), [f"{t:g}" for t in ts])
    ax.set_yticks(range(len(gs)), [f"{g:g}" for g in gs])
    ax.set_xlabel("t")
    ax.set_ylabel("gamma")
    lo, hi = np.nanmin(grid), np.nanmax(grid)
    for i in range(len(gs)):
        for j in range(len(ts)):
            if np.isfinite(grid[i, j]):
                # viridis is light at the top of its range
                light = hi > lo and (grid[i, j] - lo) / (hi - lo) > 0.6
                ax.text(j, i, f"{grid[i, j]:.1f}", ha="center", va="center",
                        fontsize=6, color="k" if light else "w")
    title = f"{method}\n{rows[0].task.label}"
    ref = [r for r in reports if r.method == reference] if reference else []
    if ref:
        title += f" ({reference} {max(r.mean_accuracy for r in ref):.1f}%)"
    ax.set_title(title, fontsize=9)
    cb = fig.colorbar(im, ax=ax)
    cb.set_label("accuracy (%)", size=STYLE["axes.labelsize"])
    cb.ax.tick_params(labelsize=STYLE["font.size"])
    return _save(fig, path)


def plot_t_curves(reports, path, reference="CORAL"):
    """Accuracy against t for each SPD method, with the reference as a line."""
    fig, ax = _new_figure()
    drawn = False
    for method, color in GCA_COLORS.items():
        rows = [r for r in reports if r.method == method]
        if not rows:
            continue
        ts = sorted({r.params.t for r in rows})
        acc = [max(r.mean_accuracy for r in rows if r.params.t == t) for t in ts]
        ax.plot(ts, acc, marker="o", ms=3, color=color, label=method)
        drawn = True
    ref = [r for r in reports if r.method == reference]
    if ref:
        ax.axhline(max(r.mean_accuracy for r in ref), color=REFERENCE_COLOR,
                   ls="--", label=reference)
    if not drawn:
        return None
    ax.set_xlabel("t")
    ax.set_ylabel("target accuracy (%)")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_improvement(summary_rows, path, method=None):
    """Percentage improvement over the reference, one bar per task."""
    rows = [r for r in summary_rows if method is None or r.method == method]
    rows = [r for r in rows if r.method != r.reference_method]
    if not rows:
        return None
    labels = [f"{r.task}\n{r.method}" if method is None else r.task for r in rows]
    vals = [r.improvement_pct for r in rows]
    fig, ax = _new_figure(max(5.0, 0.5 * len(rows)))
    colors = ["#2ca02c" if v >= 0 else REFERENCE_COLOR for v in vals]
    ax.bar(range(len(rows)), vals, color=colors)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xticks(range(len(rows)), labels, fontsize=6)
    ax.set_ylabel(f"improvement over {rows[0].reference_method} (%)")
    return _save(fig, path)


def render_report_figures(reports, stem, summary_rows=None, reference="CORAL"):
    """Write every applicable figure next to ``stem``; return written paths."""
    stem = Path(stem)
    out = [plot_method_accuracies(reports, stem.with_name(stem.name + "_accuracy.png"))]
    out.append(plot_t_curves(reports, stem.with_name(stem.name + "_t_curve.png"), reference))
    for method in GCA_COLORS:
        rows = [r for r in reports if r.method == method]
        if len({(r.params.t, r.params.gamma) for r in rows}) > 1:
            fname = stem.name + f"_{method.lower()}_sweep.png"
            out.append(plot_sweep_heatmap(reports, method, stem.with_name(fname), reference))
    if summary_rows:
        out.append(plot_improvement(summary_rows, stem.with_name(stem.name + "_improvement.png")))
    return [p for p in out if p is not None]
