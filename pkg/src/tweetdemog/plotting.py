"""Report figures rendered to PNG with matplotlib's Agg backend."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from tweetdemog.export import PALETTE, UNASSIGNED_COLOR  # noqa: E402

# no Software/date chunk, so the bytes depend on the data only
_PNG_META = {"Software": None}


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def plot_lifestage_counts(counts: dict, path) -> None:
    labels = list(counts)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    bars = ax.bar(labels, [counts[k] for k in labels], color=PALETTE[:len(labels)])
    ax.bar_label(bars)
    ax.set_ylabel("users")
    ax.set_title("Life stage per user")
    _save(fig, path)


def plot_ranking(ranking, path, top_n: int = 15) -> None:
    entries = list(ranking.entries)[:top_n]
    fig, ax = plt.subplots(figsize=(6, 0.3 * max(len(entries), 3) + 1.2))
    names = [uid for uid, _ in entries][::-1]
    values = [v for _, v in entries][::-1]
    ax.barh(names, values, color=PALETTE[0])
    ax.set_xlabel("total retweets" if ranking.kind == "total_retweets" else "distinct retweeters")
    ax.set_title(f"Top accounts by {ranking.kind.replace('_', ' ')}")
    _save(fig, path)


def plot_community_shares(shares, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    idx = list(range(len(shares)))
    bars = ax.bar(idx, [100 * s for s in shares], color=[PALETTE[c % len(PALETTE)] for c in range(len(shares))])
    ax.bar_label(bars, fmt="%.1f%%")
    ax.set_xticks(idx)
    ax.set_xlabel("community")
    ax.set_ylabel("share of nodes (%)")
    _save(fig, path)


def plot_layout(positions, communities, path) -> None:
    nodes = sorted(positions)
    colors = [PALETTE[communities[n] % len(PALETTE)] if n in communities else UNASSIGNED_COLOR
              for n in nodes]
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.scatter([positions[n][0] for n in nodes], [positions[n][1] for n in nodes], s=12, c=colors)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_title("Layout coloured by community")
    _save(fig, path)
