"""Matplotlib figures written next to the tabular reports."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path
from typing import TYPE_CHECKING

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

if TYPE_CHECKING:
    from .report import RunReport
    from .trainer import TrainStep

matplotlib.rcParams["pdf.fonttype"] = 42
matplotlib.rcParams["ps.fonttype"] = 42

_LABELS = {"knowledge_f1": "Knlg F1", "rouge1": "R1", "rouge2": "R2", "rougeL": "RL"}


def _save(fig, path: Path | str) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_scores(report: RunReport, path: Path | str) -> Path:
    """Grouped bars: one group per metric column, one bar per report row."""
    keys = [k for k in report.columns() if k in _LABELS]
    fig, ax = plt.subplots(figsize=(max(6, 1.6 * len(keys) + 2), 4))
    x = np.arange(len(keys))
    width = 0.8 / max(1, len(report.rows))
    for i, row in enumerate(report.rows):
        vals = [100 * row.values.get(k, 0.0) for k in keys]
        ax.bar(x + i * width - 0.4 + width / 2, vals, width, label=row.label)
    ax.set_xticks(x, [_LABELS[k] for k in keys])
    ax.set_ylabel("score (0-100)")
    ax.legend(fontsize=8, frameon=False)
    return _save(fig, path)


def plot_iterations(report: RunReport, path: Path | str) -> Path:
    """Score trajectory across report rows (initial summary first)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    steps = np.arange(len(report.rows))
    for key in ("knowledge_f1", "rouge1", "rouge2", "rougeL"):
        ax.plot(steps, [100 * r.values.get(key, 0.0) for r in report.rows], marker="o", label=_LABELS[key])
    ax.set_xticks(steps, [r.label for r in report.rows], rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("score (0-100)")
    ax.legend(fontsize=8, frameon=False)
    return _save(fig, path)


def plot_supervised_loss(losses: Sequence[float], path: Path | str) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(len(losses)), losses)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean binary cross-entropy")
    return _save(fig, path)


def plot_rl_curve(steps: Sequence[TrainStep], path: Path | str, window: int = 50) -> Path:
    """Per-episode reward with its moving average and the baseline used for updates."""
    rewards = np.array([s.reward for s in steps], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    episodes = np.array([s.episode for s in steps])
    ax.plot(episodes, rewards, lw=0.5, alpha=0.4, label="reward")
    if len(rewards) >= window:
        smooth = np.convolve(rewards, np.ones(window) / window, mode="valid")
        ax.plot(episodes[window - 1 :], smooth, label=f"reward ({window}-episode mean)")
    ax.plot(episodes, [s.baseline for s in steps], lw=1, label="baseline")
    ax.set_xlabel("episode")
    ax.set_ylabel("reward")
    ax.legend(fontsize=8, frameon=False)
    return _save(fig, path)
