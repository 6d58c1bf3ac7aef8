"""Figure rendering for the report paths.

Every command that writes a delimited report also renders a matching
figure next to it; all figures go through the Agg backend so headless
runs work.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import GENERATOR_COLUMNS, StatsReport  # noqa: E402


def save_training_curves(log_records, path):
    """Train loss and dev metric per epoch on twin axes."""
    epochs = [r.epoch for r in log_records]
    losses = [r.train_loss for r in log_records]
    metrics = [r.dev_metric for r in log_records]
    fig, ax1 = plt.subplots(figsize=(6, 4))
    ax1.plot(epochs, losses, "o-", color="tab:blue", label="train loss")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("train loss", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(epochs, metrics, "s--", color="tab:orange", label="dev metric")
    ax2.set_ylabel("dev metric", color="tab:orange")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_stats_chart(report: StatsReport, path):
    """Grouped bars per generator for coverage, BLEU, and TER."""
    rows = ("coverage_pct", "bleu_pct", "ter_pct")
    x = np.arange(len(GENERATOR_COLUMNS))
    width = 0.25
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, row in enumerate(rows):
        vals = [report.cells[row][g] or 0.0 for g in GENERATOR_COLUMNS]
        ax.bar(x + (k - 1) * width, vals, width, label=row)
    ax.set_xticks(x)
    ax.set_xticklabels(GENERATOR_COLUMNS)
    ax.set_ylabel("%")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_metric_histogram(values, metric_name: str, path):
    """Distribution of the per-question evaluation metric."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(list(values), bins=20, color="tab:green", edgecolor="black")
    ax.set_xlabel(metric_name)
    ax.set_ylabel("questions")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
