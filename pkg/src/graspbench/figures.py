"""Matplotlib renderings written next to report files.

Everything draws on the Agg backend so runs work headless; callers hand in
already-serialized report dictionaries, not live objects.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .scoring import SCORE_KEYS


def save_score_chart(report: dict, path) -> Path:
    """Bar chart of s1..s12 plus the overall score for one report."""
    path = Path(path)
    scores = report.get("scores", {})
    addressed = report.get("addressed", {})
    keys = list(SCORE_KEYS) + ["S"]
    values = []
    for key in keys:
        value = scores.get(key)
        if value is None or not addressed.get(key, True):
            values.append(0.0)
        else:
            values.append(value)
    colors = ["#777777" if key != "S" else "#2c7fb8" for key in keys]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(range(len(keys)), values, color=colors)
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys)
    ax.set_ylim(0, 105)
    ax.set_ylabel("score [%]")
    title = report.get("algorithm", "report")
    split = report.get("split")
    if split:
        title += f" ({split})"
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_outcome_chart(outcomes: list[dict], path) -> Path:
    """Per-configuration safety and delivery bars for a simulation run."""
    path = Path(path)
    ids = [o["config_id"] for o in outcomes]
    safety = [o["safety"] for o in outcomes]
    delivery = [o["delivery"] for o in outcomes]
    x = range(len(ids))
    width = 0.4
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(ids)), 4))
    ax.bar([i - width / 2 for i in x], safety, width=width, label="safety",
           color="#2c7fb8")
    ax.bar([i + width / 2 for i in x], delivery, width=width, label="delivery",
           color="#f4a740")
    ax.set_xticks(list(x))
    ax.set_xticklabels(ids, rotation=90, fontsize=7)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("per-configuration score")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_leaderboard_chart(rows: list[dict], path) -> Path:
    """Horizontal bars of the overall score per algorithm, best on top."""
    path = Path(path)
    names = [row["algorithm"] for row in rows]
    overall = [row["scores"].get("S") or 0.0 for row in rows]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.5 * len(rows))))
    positions = range(len(rows))
    ax.barh(positions, overall, color="#2c7fb8")
    ax.set_yticks(list(positions))
    ax.set_yticklabels(names)
    ax.invert_yaxis()
    ax.set_xlim(0, 100)
    ax.set_xlabel("overall score [%]")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
