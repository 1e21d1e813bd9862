"""Rendering of rating runs: markdown, delimited tables and figures."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .causal import format_value
from .rater import RATING_GROUPS, RatingGroup, RatingReport
from .stats import TTestResult


@dataclass(frozen=True)
class TTableRow:
    group: str
    sas: str
    emotion_set: str
    pair: str
    result: TTestResult


@dataclass(frozen=True)
class DieRow:
    group: str
    sas: str
    emotion_set: str
    obs_neg: float
    obs_pos: float
    int_neg: float
    int_pos: float
    die_neg: Optional[float]
    die_pos: Optional[float]
    die_max: Optional[float]


def write_ttable_csv(rows: Sequence[TTableRow], path, ci_levels: Sequence[int]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["group", "sas", "emotion_set", "pair", "t_abs", "dof"]
            + [f"rejected_{ci}" for ci in ci_levels]
        )
        for row in rows:
            writer.writerow(
                [row.group, row.sas, row.emotion_set, row.pair]
                + [repr(row.result.t_abs), repr(row.result.dof)]
                + [int(ci in row.result.rejected_at) for ci in ci_levels]
            )


def write_die_csv(rows: Sequence[DieRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "group",
                "sas",
                "emotion_set",
                "obs_neg",
                "obs_pos",
                "int_neg",
                "int_pos",
                "die_neg",
                "die_pos",
                "die_max",
            ]
        )
        for row in rows:
            writer.writerow(
                [row.group, row.sas, row.emotion_set]
                + [repr(v) for v in (row.obs_neg, row.obs_pos, row.int_neg, row.int_pos)]
                + [format_value(row.die_neg), format_value(row.die_pos), format_value(row.die_max)]
            )


def _report_groups(report: RatingReport) -> list[RatingGroup]:
    return [g for g in RATING_GROUPS if g in report.per_group]


def _report_names(report: RatingReport) -> list[str]:
    return sorted(report.overall)


def write_ratings_csv(report: RatingReport, path) -> None:
    groups = _report_groups(report)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["sas"] + [g.value for g in groups] + ["overall"])
        for name in _report_names(report):
            writer.writerow(
                [name]
                + [report.per_group[g].get(name, "") for g in groups]
                + [report.overall[name]]
            )


def write_orders_csv(report: RatingReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["group", "position", "sas", "psi", "rating"])
        for group in _report_groups(report):
            order = report.orders[group]
            ratings = report.per_group[group]
            for position, (name, psi) in enumerate(order.entries, start=1):
                writer.writerow([group.value, position, name, psi.display, ratings[name]])


def render_markdown(report: RatingReport) -> str:
    groups = _report_groups(report)
    names = _report_names(report)
    lines = ["# Bias rating report", ""]
    lines.append(f"Rating levels: 1 (least biased) to {report.levels} (most biased).")
    lines.append("")

    lines.append("## Ratings")
    lines.append("")
    header = ["sas"] + [g.value for g in groups] + ["overall", "prominence"]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join(["---"] * len(header)) + "|")
    for name in names:
        cells = [name]
        cells += [str(report.per_group[g].get(name, "-")) for g in groups]
        cells.append(str(report.overall[name]))
        cells.append(report.prominence.get(name) or "-")
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")

    lines.append("## Orders")
    lines.append("")
    for group in groups:
        order = report.orders[group]
        ratings = report.per_group[group]
        partial = ", ".join(f"{name}: {psi.display}" for name, psi in order.entries)
        complete = ", ".join(f"{name}: {ratings[name]}" for name, _ in order.entries)
        lines.append(f"- {group.value} partial order: {{{partial}}}")
        lines.append(f"- {group.value} complete order: {{{complete}}}")
    lines.append("")

    if report.warnings:
        lines.append("## Warnings")
        lines.append("")
        for warning in report.warnings:
            lines.append(f"- {warning}")
        lines.append("")

    lines.append("## Figures")
    lines.append("")
    lines.append("![Ratings heatmap](figures/ratings_heatmap.png)")
    lines.append("")
    lines.append("![Bias scores](figures/bias_scores.png)")
    lines.append("")
    return "\n".join(lines)


def render_ratings_heatmap(report: RatingReport, path) -> None:
    groups = _report_groups(report)
    names = _report_names(report)
    columns = [g.value for g in groups] + ["overall"]
    grid = np.full((len(names), len(columns)), np.nan)
    for i, name in enumerate(names):
        for j, group in enumerate(groups):
            if name in report.per_group[group]:
                grid[i, j] = report.per_group[group][name]
        grid[i, -1] = report.overall[name]

    fig, ax = plt.subplots(
        figsize=(1.2 + 0.9 * len(columns), 1.0 + 0.5 * len(names)), dpi=150
    )
    image = ax.imshow(grid, cmap="YlOrRd", vmin=1, vmax=report.levels, aspect="auto")
    ax.set_xticks(range(len(columns)), columns)
    ax.set_yticks(range(len(names)), names)
    for i in range(len(names)):
        for j in range(len(columns)):
            if not np.isnan(grid[i, j]):
                ax.text(j, i, int(grid[i, j]), ha="center", va="center", fontsize=9)
    ax.set_title(f"Ratings (1 = least biased, {report.levels} = most biased)")
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def render_bias_score_chart(report: RatingReport, path) -> None:
    """Horizontal bars of the per-group bias scores; undefined drawn hatched."""
    groups = _report_groups(report)
    fig, axes = plt.subplots(
        len(groups),
        1,
        figsize=(6.0, 1.0 + 1.1 * len(groups)),
        dpi=150,
        squeeze=False,
    )
    for ax, group in zip(axes.flat, groups):
        order = report.orders[group]
        labels = [name for name, _ in order.entries]
        finite = [psi.value for _, psi in order.entries if not psi.is_undefined]
        ceiling = max(finite, default=0.0) or 1.0
        for position, (name, psi) in enumerate(order.entries):
            if psi.is_undefined:
                ax.barh(position, ceiling, color="none", edgecolor="crimson", hatch="//")
                ax.text(ceiling, position, " X", va="center", color="crimson")
            else:
                ax.barh(position, psi.value, color="steelblue")
        ax.set_yticks(range(len(labels)), labels)
        ax.invert_yaxis()
        ax.set_title(group.value, fontsize=9, loc="left")
    axes.flat[-1].set_xlabel("bias score (ascending order)")
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
