"""Directed weighted retweet graph and influencer rankings.

An edge ``u -> v`` with weight ``w`` means user ``u`` retweeted user ``v``
``w`` times. Only retweets authored by the in-sample cohort create edges.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from tweetdemog.errors import DataError

TOTAL_RETWEETS = "total_retweets"
DISTINCT_RETWEETERS = "distinct_retweeters"


class RetweetGraph:
    def __init__(self):
        self.nodes: dict[str, dict] = {}
        self.out_edges: dict[str, dict[str, int]] = {}
        self.in_edges: dict[str, dict[str, int]] = {}
        self.self_loops_removed = 0
        self.non_basque_skipped = 0

    def add_node(self, node: str, **attrs) -> None:
        if node not in self.nodes:
            self.nodes[node] = {"in_sample": False}
            self.out_edges[node] = {}
            self.in_edges[node] = {}
        self.nodes[node].update(attrs)

    def add_edge(self, source: str, target: str, weight: int = 1) -> None:
        if source == target:
            raise DataError(f"self-loop on {source!r}")
        if weight < 1:
            raise DataError(f"edge weight must be >= 1, got {weight}")
        self.add_node(source, in_sample=True)
        self.add_node(target)
        self.out_edges[source][target] = self.out_edges[source].get(target, 0) + weight
        self.in_edges[target][source] = self.in_edges[target].get(source, 0) + weight

    def edges(self):
        """``(source, target, weight)`` triples in sorted order."""
        for s in sorted(self.out_edges):
            for t in sorted(self.out_edges[s]):
                yield s, t, self.out_edges[s][t]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.out_edges.values())

    def total_weight(self) -> int:
        return sum(sum(v.values()) for v in self.out_edges.values())

    def in_weight(self, node: str) -> int:
        return sum(self.in_edges.get(node, {}).values())

    def in_degree(self, node: str) -> int:
        return len(self.in_edges.get(node, {}))

    def sorted_nodes(self) -> list[str]:
        return sorted(self.nodes)

    def undirected(self) -> dict[str, dict[str, float]]:
        """Symmetrised adjacency; reciprocal edges have their weights summed."""
        adj: dict[str, dict[str, float]] = {n: {} for n in sorted(self.nodes)}
        for s, t, w in self.edges():
            adj[s][t] = adj[s].get(t, 0) + w
            adj[t][s] = adj[t].get(s, 0) + w
        return adj

    def directed(self) -> dict[str, dict[str, float]]:
        return {n: {t: float(self.out_edges[n][t]) for t in sorted(self.out_edges[n])}
                for n in sorted(self.nodes)}

    def __eq__(self, other):
        return (isinstance(other, RetweetGraph) and self.nodes == other.nodes
                and list(self.edges()) == list(other.edges()))

    def stats(self) -> dict:
        return {
            "nodes": self.n_nodes,
            "edges": self.n_edges,
            "total_retweets": self.total_weight(),
            "in_sample_nodes": sum(a["in_sample"] for a in self.nodes.values()),
            "self_loops_removed": self.self_loops_removed,
            "non_basque_retweets_skipped": self.non_basque_skipped,
        }


def build_graph(corpus, young_users, basque_only: bool = True) -> RetweetGraph:
    """Aggregate the cohort's retweets into a weighted graph.

    Self-retweets are dropped and counted in ``self_loops_removed``. With
    ``basque_only`` retweets whose ``lang`` is set to something other than
    ``"eu"`` are skipped (and counted); an empty ``lang`` passes.
    """
    young_users = set(young_users)
    missing = sorted(u for u in young_users if u not in corpus)
    if missing:
        raise DataError(f"{len(missing)} cohort user(s) not in corpus, e.g. {missing[:5]}")
    g = RetweetGraph()
    counts: dict[tuple[str, str], int] = {}
    for uid in sorted(young_users):
        for tw in corpus[uid].tweets:
            if tw.retweet_of_user_id is None:
                continue
            if basque_only and tw.lang and tw.lang != "eu":
                g.non_basque_skipped += 1
                continue
            if tw.retweet_of_user_id == uid:
                g.self_loops_removed += 1
                continue
            key = (uid, tw.retweet_of_user_id)
            counts[key] = counts.get(key, 0) + 1
    for (s, t), w in sorted(counts.items()):
        g.add_edge(s, t, w)
    for node in g.nodes:
        if node in young_users:
            g.nodes[node]["in_sample"] = True
    return g


@dataclass
class InfluencerRanking:
    kind: str
    entries: list[tuple[str, int]] = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rank", "user_id", "value", "kind"])
            for rank, (uid, value) in enumerate(self.entries, 1):
                w.writerow([rank, uid, value, self.kind])


def _rank(graph: RetweetGraph, value, kind: str, top_k: int | None) -> InfluencerRanking:
    scored = sorted(((-value(n), n) for n in graph.nodes), key=lambda x: (x[0], x[1]))
    if top_k is not None:
        scored = scored[:top_k]
    return InfluencerRanking(kind, [(n, -v) for v, n in scored])


def rank_total_retweets(graph: RetweetGraph, top_k: int | None = None) -> InfluencerRanking:
    """Nodes by total number of times retweeted (in-weight)."""
    return _rank(graph, graph.in_weight, TOTAL_RETWEETS, top_k)


def rank_distinct_retweeters(graph: RetweetGraph, top_k: int | None = None) -> InfluencerRanking:
    """Nodes by number of distinct in-sample users retweeting them (in-degree)."""
    return _rank(graph, graph.in_degree, DISTINCT_RETWEETERS, top_k)


def write_edges(graph: RetweetGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target", "weight"])
        for s, t, wt in graph.edges():
            w.writerow([s, t, wt])


def read_edges(path) -> RetweetGraph:
    g = RetweetGraph()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or {"source", "target", "weight"} - set(reader.fieldnames):
            raise DataError(f"{path}: expected columns source,target,weight")
        for lineno, row in enumerate(reader, 2):
            try:
                g.add_edge(row["source"], row["target"], int(row["weight"]))
            except (ValueError, DataError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return g
