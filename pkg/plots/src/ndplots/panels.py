"""Figure panels: margin-vs-loss curves and alignment over normalized time.

Runs are grouped by the parent directory name (the sweep layout writes
``<optimizer>/seed<k>.csv``). Groups with several seeds are drawn as a mean
line with a shaded 95% normal-approximation band on a shared grid; missing
values stay missing (line gaps), never interpolated.
"""

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import csvio

plt.rcParams["svg.hashsalt"] = "ndplots"

GRID_POINTS = 200
PANELS = ("margin_vs_loss", "alignment_vs_time")


@dataclass(frozen=True)
class PlotJob:
    csv_paths: tuple
    out_dir: str
    panels: tuple = PANELS
    margin_kind: str = "hard"
    formats: tuple = ("png", "svg")


@dataclass
class RunGroup:
    name: str
    runs: list = field(default_factory=list)


def load_groups(paths):
    groups = {}
    for path in sorted(str(p) for p in paths):
        columns = csvio.read_run(path)
        key = Path(path).parent.name or "run"
        groups.setdefault(key, RunGroup(name=key)).runs.append(columns)
    if not groups:
        raise ValueError("no input CSVs matched")
    return [groups[k] for k in sorted(groups)]


def _grid_aggregate(xs, ys, grid):
    """Mean and 95% half-width of y over runs on a shared descending grid.

    Each run is interpolated onto the grid only inside its own x-range and
    only through defined values; a grid point is kept when every run defines
    it, so gaps survive aggregation.
    """
    stack = np.full((len(xs), grid.size), np.nan)
    for i, (x, y) in enumerate(zip(xs, ys)):
        ok = ~(np.isnan(x) | np.isnan(y))
        if ok.sum() < 2:
            continue
        x, y = x[ok], y[ok]
        order = np.argsort(x)
        x, y = x[order], y[order]
        keep = np.ones(x.size, dtype=bool)
        keep[1:] = np.diff(x) > 0
        x, y = x[keep], y[keep]
        inside = (grid >= x[0]) & (grid <= x[-1])
        stack[i, inside] = np.interp(grid[inside], x, y)
    defined = ~np.isnan(stack)
    full = defined.all(axis=0)
    mean = np.full(grid.size, np.nan)
    half = np.full(grid.size, np.nan)
    if full.any():
        sub = stack[:, full]
        mean[full] = sub.mean(axis=0)
        if len(xs) > 1:
            sd = sub.std(axis=0, ddof=1)
            half[full] = 1.96 * sd / np.sqrt(len(xs))
        else:
            half[full] = 0.0
    return mean, half


def _style_cycle():
    return plt.rcParams["axes.prop_cycle"].by_key()["color"]


def render_margin_vs_loss(groups, norm_name, margin_kind, out_base, formats):
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    colors = _style_cycle()
    col = f"{margin_kind}_margin_{norm_name}"
    losses_all = np.concatenate(
        [run["loss"] for g in groups for run in g.runs if col in run]
    )
    losses_all = losses_all[np.isfinite(losses_all) & (losses_all > 0)]
    lo, hi = losses_all.min(), losses_all.max()
    grid = np.logspace(np.log10(hi), np.log10(lo), GRID_POINTS)
    for i, group in enumerate(groups):
        runs = [run for run in group.runs if col in run]
        if not runs:
            continue
        xs = [run["loss"] for run in runs]
        ys = [run[col] for run in runs]
        if len(runs) == 1:
            ok = np.isfinite(xs[0]) & (xs[0] > 0)
            ax.plot(xs[0][ok], np.where(ok, ys[0], np.nan)[ok], label=group.name,
                    color=colors[i % len(colors)])
        else:
            mean, half = _grid_aggregate(xs, ys, grid)
            ax.plot(grid, mean, label=group.name, color=colors[i % len(colors)])
            ax.fill_between(grid, mean - half, mean + half,
                            color=colors[i % len(colors)], alpha=0.25, linewidth=0)
    ax.set_xscale("log")
    ax.invert_xaxis()
    ax.set_xlabel("training loss (decreasing)")
    ax.set_ylabel(f"{margin_kind} margin ({norm_name})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, out_base, formats)


def render_alignment_vs_time(groups, out_base, formats, column="param_alignment"):
    fig, ax = plt.subplots(figsize=(4.0, 3.4))
    colors = _style_cycle()
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    for i, group in enumerate(groups):
        runs = [run for run in group.runs if column in run and run["t"].size > 1]
        if not runs:
            continue
        xs = [run["t"] / run["t"][-1] for run in runs]
        ys = [run[column] for run in runs]
        if len(runs) == 1:
            ax.plot(xs[0], ys[0], label=group.name, color=colors[i % len(colors)])
        else:
            mean, half = _grid_aggregate(xs, ys, grid)
            ax.plot(grid, mean, label=group.name, color=colors[i % len(colors)])
            ax.fill_between(grid, mean - half, mean + half,
                            color=colors[i % len(colors)], alpha=0.25, linewidth=0)
    ax.set_xlabel("normalized time t / t_final")
    ax.set_ylabel(column)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, out_base, formats)


def _save(fig, out_base, formats):
    out_base = Path(out_base)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        path = out_base.with_suffix(f".{fmt}")
        fig.savefig(path, format=fmt, metadata={"Date": None} if fmt == "svg" else None)
        written.append(path)
    plt.close(fig)
    return written


def render(job):
    """Render every requested panel; returns the list of files written."""
    groups = load_groups(job.csv_paths)
    written = []
    out_dir = Path(job.out_dir)
    for panel in job.panels:
        if panel == "margin_vs_loss":
            norm_names = sorted(
                {n for g in groups for run in g.runs
                 for n in csvio.margin_columns(run, job.margin_kind)}
            )
            for norm_name in norm_names:
                written += render_margin_vs_loss(
                    groups, norm_name, job.margin_kind,
                    out_dir / f"margin_vs_loss_{norm_name}", job.formats,
                )
        elif panel == "alignment_vs_time":
            written += render_alignment_vs_time(groups, out_dir / "alignment_vs_time", job.formats)
        else:
            raise ValueError(f"unknown panel {panel!r}; choose from {PANELS}")
    return written
