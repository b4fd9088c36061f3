"""Walker/Vose alias tables: O(1) draws from a fixed discrete distribution."""

from __future__ import annotations

import math

import numpy as np

from tweetdemog.errors import ParameterError


class AliasTable:
    """Sampler drawing index ``i`` with probability ``weights[i] / sum(weights)``.

    Each column ``i`` keeps itself with probability ``prob[i]`` and otherwise
    hands over to ``alias[i]``.
    """

    __slots__ = ("prob", "alias", "n")

    def __init__(self, weights):
        weights = [float(w) for w in weights]
        if not weights:
            raise ParameterError("alias table needs at least one weight")
        if any(not (w > 0) or math.isinf(w) for w in weights):
            raise ParameterError("alias weights must be positive and finite")
        n = len(weights)
        total = math.fsum(weights)
        scaled = [w * n / total for w in weights]
        prob = [1.0] * n
        alias = list(range(n))
        small = [i for i, s in enumerate(scaled) if s < 1.0]
        large = [i for i, s in enumerate(scaled) if s >= 1.0]
        while small and large:
            s, g = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            # (scaled[g] + scaled[s]) - 1 loses less precision than scaled[g] - (1 - scaled[s])
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are within rounding of 1 and keep themselves
        self.prob = prob
        self.alias = alias
        self.n = n

    def draw(self, rng) -> int:
        """One draw using a :class:`random.Random`-like ``rng``."""
        i = int(rng.random() * self.n)
        return i if rng.random() < self.prob[i] else self.alias[i]

    def draw_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cols = rng.integers(0, self.n, size=size)
        keep = rng.random(size) < np.asarray(self.prob)[cols]
        return np.where(keep, cols, np.asarray(self.alias)[cols])

    def implied_probabilities(self) -> list[float]:
        """Exact distribution encoded by the table (summing column contributions)."""
        p = [0.0] * self.n
        for i in range(self.n):
            p[i] += self.prob[i]
            p[self.alias[i]] += 1.0 - self.prob[i]
        return [x / self.n for x in p]


def alias_table(weights) -> AliasTable:
    return AliasTable(weights)
