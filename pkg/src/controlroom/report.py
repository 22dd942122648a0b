"""Evaluation reports: delimited outcome tables plus rendered figures.

Every report path writes machine-readable CSV next to PNG figures so a
run can be inspected without re-executing it.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.colors import ListedColormap
from matplotlib.patches import Patch

from .geometry import PointingDistribution, ScreenLayout
from .harness import MetricsReport, Outcome, task_completion_rate

OUTCOME_COLORS = {"S": "#4daf4a", "PS": "#ffb000", "F": "#e41a1c"}
_OUTCOME_LEVEL = {"S": 2, "PS": 1, "F": 0}


def write_outcomes_csv(outcomes: Sequence[Outcome], path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "outcome", "clarifications", "rejections", "commands"])
        for o in outcomes:
            writer.writerow([o.scenario_id, o.label, o.clarifications, o.rejections, len(o.issued)])
    return path


def write_metrics_csv(report: MetricsReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerow(["task_completion_rate", f"{report.task_completion_rate:.4f}"])
        if report.nlu_success_rate is not None:
            writer.writerow(["nlu_success_rate", f"{report.nlu_success_rate:.4f}"])
        if report.gesture_accuracy is not None:
            writer.writerow(["gesture_accuracy", f"{report.gesture_accuracy:.4f}"])
    return path


def render_outcome_grid(
    grid: Sequence[Sequence[str]],
    tasks: Sequence[str],
    users: Sequence[str],
    path: Union[str, Path],
) -> Path:
    """Users x tasks outcome matrix with one colored cell per S/PS/F label."""
    path = Path(path)
    data = [[_OUTCOME_LEVEL[label] for label in row] for row in grid]
    cmap = ListedColormap([OUTCOME_COLORS["F"], OUTCOME_COLORS["PS"], OUTCOME_COLORS["S"]])
    fig, ax = plt.subplots(figsize=(1.0 + 0.7 * len(tasks), 0.8 + 0.35 * len(users)))
    ax.imshow(data, cmap=cmap, vmin=0, vmax=2, aspect="auto")
    ax.set_xticks(range(len(tasks)), tasks)
    ax.set_yticks(range(len(users)), users)
    for y, row in enumerate(grid):
        for x, label in enumerate(row):
            ax.text(x, y, label, ha="center", va="center", fontsize=8)
    ax.set_title("Task outcomes")
    ax.legend(
        handles=[Patch(color=OUTCOME_COLORS[k], label=k) for k in ("S", "PS", "F")],
        loc="upper left",
        bbox_to_anchor=(1.02, 1.0),
        frameon=False,
    )
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_completion_bars(
    per_task: Mapping[str, float],
    overall: Optional[float],
    path: Union[str, Path],
) -> Path:
    """Per-task completion rate bars with the overall rate as a reference line."""
    path = Path(path)
    names = list(per_task)
    values = [per_task[n] for n in names]
    fig, ax = plt.subplots(figsize=(1.5 + 0.6 * len(names), 3.2))
    ax.bar(names, values, color="#377eb8")
    if overall is not None:
        ax.axhline(overall, color="#e41a1c", linestyle="--", linewidth=1, label=f"overall {overall:.2f}")
        ax.legend(frameon=False)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("completion rate")
    ax.set_title("Task completion")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_pointing_heatmap(
    dist: PointingDistribution,
    layout: ScreenLayout,
    path: Union[str, Path],
) -> Path:
    """Per-cell pointing probabilities painted over the monitor grid."""
    path = Path(path)
    data = [[0.0] * layout.cols for _ in range(layout.rows)]
    for monitor, prob in dist.probs.items():
        row, col = layout.monitor_cell(monitor)
        data[row - 1][col - 1] = prob
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    im = ax.imshow(data, cmap="viridis", vmin=0.0, vmax=1.0)
    for m in range(1, layout.monitor_count + 1):
        row, col = layout.monitor_cell(m)
        prob = dist.probs.get(m, 0.0)
        ax.text(
            col - 1,
            row - 1,
            f"{m}\n{prob:.2f}",
            ha="center",
            va="center",
            fontsize=8,
            color="white" if prob < 0.6 else "black",
        )
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_title(f"Pointing window [{dist.window_start}, {dist.window_end}] ms")
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def per_task_rates(outcomes: Sequence[Outcome]) -> dict[str, float]:
    rates: dict[str, float] = {}
    for o in outcomes:
        rates[o.scenario_id] = task_completion_rate([o])
    return rates


def write_suite_report(
    report: MetricsReport,
    out_dir: Union[str, Path],
    grid: Optional[Sequence[Sequence[str]]] = None,
    tasks: Optional[Sequence[str]] = None,
    users: Optional[Sequence[str]] = None,
) -> list[Path]:
    """CSV tables plus figures for one suite run (or a study fixture grid)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        write_outcomes_csv(report.outcomes, out / "outcomes.csv"),
        write_metrics_csv(report, out / "metrics.csv"),
        render_completion_bars(
            per_task_rates(report.outcomes), report.task_completion_rate, out / "completion.png"
        ),
    ]
    if grid is not None and tasks is not None and users is not None:
        written.append(render_outcome_grid(grid, tasks, users, out / "outcome_grid.png"))
    else:
        rows = [[o.label] for o in report.outcomes]
        labels = [o.scenario_id for o in report.outcomes]
        written.append(render_outcome_grid(rows, ["outcome"], labels, out / "outcome_grid.png"))
    return written
