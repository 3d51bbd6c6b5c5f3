"""Matplotlib figures written next to evaluation reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluation import EvalReport  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
}
# fixed metadata keeps repeated renders byte-identical
PNG_METADATA = {"Software": None}


def figure_path(report_path: str | Path, suffix: str) -> Path:
    p = Path(report_path)
    return p.with_name(f"{p.stem}_{suffix}.png")


def plot_rouge_recall(report: EvalReport, path: str | Path) -> Path:
    """Grouped bars of mean ROUGE-1/ROUGE-2 recall per algorithm."""
    algos = report.algorithms()
    r1 = [report.mean(a).rouge1.recall for a in algos]
    r2 = [report.mean(a).rouge2.recall for a in algos]
    x = np.arange(len(algos))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(3.5, 1.1 * len(algos) + 1.5), 2.8))
        ax.bar(x - 0.2, r1, width=0.4, label="ROUGE-1", color="#4c72b0")
        ax.bar(x + 0.2, r2, width=0.4, label="ROUGE-2", color="#dd8452")
        ax.set_xticks(x, algos, rotation=20, ha="right")
        ax.set_ylabel("mean recall")
        ax.set_ylim(0, 1)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, metadata=PNG_METADATA)
        plt.close(fig)
    return Path(path)


def plot_recall_distribution(report: EvalReport, path: str | Path) -> Path:
    """Per-instance ROUGE-1 recall, one box per algorithm."""
    algos = report.algorithms()
    data: Sequence[list[float]] = [
        [r.rouge1.recall for r in report.per_instance if r.algorithm == a] for a in algos
    ]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(3.5, 1.1 * len(algos) + 1.5), 2.8))
        ax.boxplot(data, showmeans=True)
        ax.set_xticks(np.arange(1, len(algos) + 1), algos, rotation=20, ha="right")
        ax.set_ylabel("ROUGE-1 recall")
        ax.set_ylim(0, 1)
        fig.tight_layout()
        fig.savefig(path, metadata=PNG_METADATA)
        plt.close(fig)
    return Path(path)


def render_report_figures(report: EvalReport, report_path: str | Path) -> list[Path]:
    if not report.aggregates:
        return []
    return [
        plot_rouge_recall(report, figure_path(report_path, "recall")),
        plot_recall_distribution(report, figure_path(report_path, "r1_distribution")),
    ]
