"""Second-order biased random walks (node2vec).

From ``curr`` having arrived from ``prev``, a neighbour ``x`` reached over an
edge of weight ``w`` gets unnormalised weight ``w/p`` when ``x == prev``,
``w`` when ``x`` is also a neighbour of ``prev`` and ``w/q`` otherwise.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass

from tweetdemog.embedding.alias import AliasTable
from tweetdemog.errors import DataError, ParameterError

#: precompute per-edge alias tables only when the total table size stays below this
DEFAULT_PRECOMPUTE_LIMIT = 5_000_000


@dataclass
class WalkConfig:
    p: float = 1.0
    q: float = 0.5
    walk_length: int = 80
    walks_per_node: int = 10
    seed: int = 0
    directed: bool = False

    def validate(self):
        if not (self.p > 0 and self.q > 0):
            raise ParameterError("p and q must be positive")
        if self.walk_length < 2:
            raise ParameterError("walk_length must be >= 2")
        if self.walks_per_node < 1:
            raise ParameterError("walks_per_node must be >= 1")


def walk_step_weights(adj, prev, curr, p: float, q: float) -> dict:
    """Unnormalised transition weights out of ``curr`` given the previous node."""
    if curr not in adj.get(prev, {}):
        raise ParameterError(f"{prev!r} is not adjacent to {curr!r}")
    prev_nbrs = adj[prev]
    out = {}
    for x, w in adj[curr].items():
        if x == prev:
            out[x] = w / p
        elif x in prev_nbrs:
            out[x] = w
        else:
            out[x] = w / q
    return out


class _OnTheFly:
    """Sampler recomputing the biased weights at every step."""

    def __init__(self, adj, p, q):
        self.adj, self.p, self.q = adj, p, q

    def __call__(self, prev, curr, rng):
        weights = walk_step_weights(self.adj, prev, curr, self.p, self.q)
        nbrs = list(weights)
        cum, acc = [], 0.0
        for x in nbrs:
            acc += weights[x]
            cum.append(acc)
        i = bisect.bisect_right(cum, rng.random() * acc)
        return nbrs[min(i, len(nbrs) - 1)]


class _Precomputed:
    """Sampler with one alias table per directed (prev, curr) edge."""

    def __init__(self, adj, p, q):
        self.tables = {}
        for prev in adj:
            for curr in adj[prev]:
                if not adj[curr]:
                    continue
                weights = walk_step_weights(adj, prev, curr, p, q)
                self.tables[prev, curr] = (list(weights), AliasTable(list(weights.values())))

    def __call__(self, prev, curr, rng):
        nbrs, table = self.tables[prev, curr]
        return nbrs[table.draw(rng)]


def make_step_sampler(adj, p, q, precompute: bool | None = None):
    """Precompute when ``precompute`` is True, or when None and the tables fit."""
    if precompute is None:
        size = sum(len(adj[c]) for prev in adj for c in adj[prev])
        precompute = size <= DEFAULT_PRECOMPUTE_LIMIT
    return _Precomputed(adj, p, q) if precompute else _OnTheFly(adj, p, q)


def _check_adjacency(adj):
    for u, nbrs in adj.items():
        for v, w in nbrs.items():
            if v not in adj:
                raise DataError(f"neighbour {v!r} of {u!r} is not a node")
            if not w > 0:
                raise DataError(f"edge {u!r}-{v!r} has non-positive weight {w}")


def generate_walks(adj, config: WalkConfig, precompute: bool | None = None) -> list[list]:
    """``walks_per_node`` walks from every node of the weighted adjacency ``adj``.

    Walks are ``walk_length`` nodes long unless they reach a node without
    neighbours. Walk ``r`` from ``node`` uses its own RNG stream seeded from
    ``(seed, node, r)``, so output is fixed per (graph, config).
    """
    config.validate()
    if not adj:
        raise DataError("cannot walk an empty graph")
    _check_adjacency(adj)
    nodes = sorted(adj)
    first = {n: (list(adj[n]), AliasTable(list(adj[n].values()))) for n in nodes if adj[n]}
    step = make_step_sampler(adj, config.p, config.q, precompute)
    walks = []
    for r in range(config.walks_per_node):
        for start in nodes:
            rng = random.Random(f"{config.seed}:{start}:{r}")
            walk = [start]
            if start in first:
                nbrs, table = first[start]
                walk.append(nbrs[table.draw(rng)])
                while len(walk) < config.walk_length and adj[walk[-1]]:
                    walk.append(step(walk[-2], walk[-1], rng))
            walks.append(walk)
    return walks
