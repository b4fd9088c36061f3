"""Exactly-K communities from node embeddings, and per-community summaries."""

from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass, field

from tweetdemog.embedding.kmeans import kmeans
from tweetdemog.errors import DataError


@dataclass
class CommunityAssignment:
    labels: dict[str, int]
    k: int
    unembedded: list[str] = field(default_factory=list)

    @property
    def shares(self) -> list[float]:
        sizes = self.sizes
        n = sum(sizes)
        return [s / n for s in sizes] if n else [0.0] * self.k

    @property
    def sizes(self) -> list[int]:
        sizes = [0] * self.k
        for c in self.labels.values():
            sizes[c] += 1
        return sizes

    def members(self, community: int) -> list[str]:
        return sorted(n for n, c in self.labels.items() if c == community)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["user_id", "community"])
            for node in sorted(self.labels):
                w.writerow([node, self.labels[node]])

    @classmethod
    def from_csv(cls, path, k: int | None = None) -> CommunityAssignment:
        labels = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or {"user_id", "community"} - set(reader.fieldnames):
                raise DataError(f"{path}: expected columns user_id,community")
            for lineno, row in enumerate(reader, 2):
                try:
                    labels[row["user_id"]] = int(row["community"])
                except ValueError:
                    raise DataError(f"{path}:{lineno}: bad community id") from None
        if k is None:
            k = max(labels.values(), default=-1) + 1
        return cls(labels, k)


def _canonical(raw_labels, nodes, k):
    """Renumber clusters by decreasing size, ties by smallest member id."""
    groups = {}
    for node, c in zip(nodes, raw_labels):
        groups.setdefault(int(c), []).append(node)
    order = sorted(groups, key=lambda c: (-len(groups[c]), min(groups[c])))
    remap = {old: new for new, old in enumerate(order)}
    return {node: remap[int(c)] for node, c in zip(nodes, raw_labels)}


def kmeans_communities(embeddings, k: int = 4, seed: int = 0, nodes=None,
                       n_init: int = 10) -> CommunityAssignment:
    """Cluster the embedded nodes into exactly ``k`` non-empty communities.

    ``nodes`` (e.g. all graph nodes) may include nodes without a vector; each
    such node joins the community of the embedded node whose id sorts
    nearest to it (the preceding id, or the first id if none precedes) and is
    listed in ``unembedded``.
    """
    emb_nodes = list(embeddings.nodes)
    if len(emb_nodes) < k:
        raise DataError(f"need at least k={k} embedded nodes, got {len(emb_nodes)}")
    res = kmeans(embeddings.vectors, k, seed=seed, n_init=n_init)
    labels = _canonical(res.labels, emb_nodes, k)
    unembedded = []
    if nodes is not None:
        ordered = sorted(labels)
        for node in sorted(set(nodes) - set(labels)):
            i = bisect.bisect_left(ordered, node)
            labels[node] = labels[ordered[max(i - 1, 0)]]
            unembedded.append(node)
    return CommunityAssignment(dict(sorted(labels.items())), k, unembedded)


def characterize_communities(assignment: CommunityAssignment, graph, top_n: int = 10) -> list[dict]:
    """Share and most-retweeted members (by total retweets in the whole graph) per community."""
    missing = [n for n in graph.nodes if n not in assignment.labels]
    if missing:
        raise DataError(f"{len(missing)} graph node(s) lack a community, e.g. {sorted(missing)[:5]}")
    shares, sizes = assignment.shares, assignment.sizes
    report = []
    for c in range(assignment.k):
        members = [n for n in assignment.members(c) if n in graph.nodes]
        ranked = sorted(members, key=lambda n: (-graph.in_weight(n), n))[:top_n]
        report.append({
            "community": c,
            "size": sizes[c],
            "share": shares[c],
            "share_percent": round(100 * shares[c], 2),
            "top_members": [{"user_id": n, "total_retweets": graph.in_weight(n)} for n in ranked],
        })
    return report
