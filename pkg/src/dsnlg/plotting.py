"""Figures for the report commands (written to files, never shown)."""
from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_generation(metrics: dict, path) -> Path:
    names = ["generated_to_goal", "em", "rouge1", "rouge2", "rougeL"]
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.bar(names, [metrics[n] for n in names], color="#4c72b0")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(f"generation ({metrics['samples']} goals)")
    ax.tick_params(axis="x", labelrotation=20)
    return _save(fig, path)


def plot_repairs(result: dict, path) -> Path:
    buckets = [b for b in result if b not in ("overall", "outputs")]
    fig, ax = plt.subplots(figsize=(5, 3))
    bars = ax.bar(buckets, [result[b]["em"] for b in buckets], color="#dd8452")
    for bar, b in zip(bars, buckets):
        ax.annotate(f"n={result[b]['n']}", (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                    ha="center", va="bottom", fontsize=8)
    ax.set_ylim(0, 1.15)
    ax.set_ylabel("EM")
    ax.set_title("repairs by condition")
    ax.tick_params(axis="x", labelrotation=15)
    return _save(fig, path)


def plot_lengths(entries, path) -> Path:
    counts = Counter(len(e.tokens) for e in entries)
    xs = sorted(counts)
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.bar(xs, [counts[x] for x in xs], color="#55a868")
    ax.set_xlabel("utterance length (tokens)")
    ax.set_ylabel("samples")
    ax.set_xticks(xs)
    return _save(fig, path)
