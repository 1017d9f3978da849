"""Static figure rendering for command outputs.

Every helper writes a PNG next to the delimited report it visualizes and
returns the path. Rendering is headless; nothing opens a window.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_loss_curve(loss_curve: Sequence[float], path, title: str = "training loss") -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(range(1, len(loss_curve) + 1), list(loss_curve), lw=1.5)
    ax.set_xlabel("step")
    ax.set_ylabel("batch loss")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def save_metric_bars(aggregates: dict[str, float], path, title: str = "evaluation") -> str:
    names = sorted(aggregates)
    values = [aggregates[k] for k in names]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(names, values, color="#4878a8")
    ax.set_ylabel("score (%)")
    ax.set_ylim(0, 100)
    ax.set_title(title)
    for i, v in enumerate(values):
        ax.text(i, v + 1, f"{v:.1f}", ha="center", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def save_sweep_lines(
    rows: Sequence[dict],
    x_key: str,
    y_keys: Sequence[str],
    path,
    title: str,
    group_key: str | None = None,
) -> str:
    """Line plot of sweep results; one line per y key (and per group value)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    groups = sorted({r[group_key] for r in rows}) if group_key else [None]
    for group in groups:
        subset = [r for r in rows if group is None or r[group_key] == group]
        xs = [float(r[x_key]) for r in subset]
        for y in y_keys:
            ys = [float(r[y]) for r in subset]
            label = y if group is None else f"{y} ({group_key}={group})"
            ax.plot(xs, ys, marker="o", label=label)
    ax.set_xlabel(x_key)
    ax.set_ylabel("score (%)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def save_arm_bars(rows: Sequence[dict], arm_key: str, y_keys: Sequence[str], path, title: str) -> str:
    """Grouped bars for categorical sweep arms."""
    arms = [str(r[arm_key]) for r in rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    width = 0.8 / max(1, len(y_keys))
    for i, y in enumerate(y_keys):
        xs = [j + i * width for j in range(len(arms))]
        ax.bar(xs, [float(r[y]) for r in rows], width=width, label=y)
    ax.set_xticks([j + width * (len(y_keys) - 1) / 2 for j in range(len(arms))])
    ax.set_xticklabels(arms, rotation=15, fontsize=8)
    ax.set_ylabel("score (%)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def save_domain_bars(rows: Sequence[dict], path, title: str = "corpus composition") -> str:
    """Passage and QA-pair counts per domain from a stats table."""
    domains = [r["domain"] for r in rows if r["domain"] != "Overall"]
    passages = [r["passages"] for r in rows if r["domain"] != "Overall"]
    qa = [r["qa_pairs"] for r in rows if r["domain"] != "Overall"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    ax1.bar(domains, passages, color="#4878a8")
    ax1.set_title("passages")
    ax1.tick_params(axis="x", rotation=20, labelsize=8)
    ax2.bar(domains, qa, color="#a85448")
    ax2.set_title("QA pairs")
    ax2.tick_params(axis="x", rotation=20, labelsize=8)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)
