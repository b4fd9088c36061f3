"""ForceAtlas2 spatialisation in two dimensions.

Forces per iteration, with node mass ``m = degree + 1``:

* repulsion between every pair: ``k_r * m_i * m_j / d`` (exact O(n^2) or
  Barnes-Hut);
* attraction along each edge: ``w**delta * d``, or ``w**delta * log(1 + d)``
  in LinLog mode;
* gravity towards the origin: ``k_g * m``.

Node displacement uses the adaptive global speed driven by total swinging
versus effective traction, and a per-node damping by local swinging, as in
the Gephi implementation.
"""

from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass

import numpy as np

from tweetdemog.errors import DataError, ParameterError
from tweetdemog.layout.barneshut import DEFAULT_ORDER, barnes_hut_repulsion

COINCIDENT_EPS = 1e-6
AUTO_BARNES_HUT_ABOVE = 1000
_EXACT_CHUNK = 512


@dataclass
class LayoutConfig:
    iterations: int = 1000
    scaling: float = 2.0
    gravity: float = 1.0
    linlog: bool = False
    barnes_hut: bool | None = None  # None: on for graphs above 1000 nodes
    theta: float = 1.2
    edge_weight_influence: float = 1.0
    jitter_tolerance: float = 1.0
    multipole_order: int = DEFAULT_ORDER
    seed: int = 0

    def validate(self):
        if self.iterations < 0:
            raise ParameterError("iterations must be >= 0")
        if not self.theta > 0:
            raise ParameterError("theta must be positive")
        if not self.scaling > 0:
            raise ParameterError("scaling must be positive")
        if self.gravity < 0:
            raise ParameterError("gravity must be >= 0")
        if self.multipole_order < 1:
            raise ParameterError("multipole_order must be >= 1")

    def use_barnes_hut(self, n: int) -> bool:
        return n > AUTO_BARNES_HUT_ABOVE if self.barnes_hut is None else self.barnes_hut


class LayoutPositions(dict):
    """``node -> (x, y)``."""

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["user_id", "x", "y"])
            for node in sorted(self):
                x, y = self[node]
                w.writerow([node, repr(float(x)), repr(float(y))])

    @classmethod
    def from_csv(cls, path) -> LayoutPositions:
        out = cls()
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or {"user_id", "x", "y"} - set(reader.fieldnames):
                raise DataError(f"{path}: expected columns user_id,x,y")
            for lineno, row in enumerate(reader, 2):
                try:
                    out[row["user_id"]] = (float(row["x"]), float(row["y"]))
                except ValueError:
                    raise DataError(f"{path}:{lineno}: bad coordinate") from None
        return out


@dataclass
class LayoutGraph:
    """Array form of an undirected weighted graph."""

    nodes: list
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    mass: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)


def as_layout_graph(graph) -> LayoutGraph:
    """Accept a RetweetGraph, a symmetric adjacency dict, or a LayoutGraph."""
    if isinstance(graph, LayoutGraph):
        return graph
    adj = graph.undirected() if hasattr(graph, "undirected") else graph
    nodes = sorted(adj)
    index = {n: i for i, n in enumerate(nodes)}
    src, dst, wts = [], [], []
    for u in nodes:
        for v, w in adj[u].items():
            if v == u:
                continue
            if v not in index:
                raise DataError(f"neighbour {v!r} of {u!r} is not a node")
            if index[u] < index[v]:
                src.append(index[u])
                dst.append(index[v])
                wts.append(float(w))
    degree = np.zeros(len(nodes))
    np.add.at(degree, np.asarray(src, dtype=np.int64), 1)
    np.add.at(degree, np.asarray(dst, dtype=np.int64), 1)
    return LayoutGraph(nodes, np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64),
                       np.asarray(wts, dtype=np.float64), degree + 1.0)


def repulsion_exact(pos, mass, coefficient: float) -> np.ndarray:
    pos = np.asarray(pos, dtype=np.float64)
    n = pos.shape[0]
    out = np.zeros((n, 2))
    for a in range(0, n, _EXACT_CHUNK):
        b = min(n, a + _EXACT_CHUNK)
        diff = pos[a:b, None, :] - pos[None, :, :]
        d2 = (diff ** 2).sum(axis=2)
        rows = np.arange(b - a)
        d2[rows, rows + a] = np.inf
        with np.errstate(divide="ignore"):
            factor = coefficient * mass[a:b, None] * mass[None, :] / d2
        factor[~np.isfinite(factor)] = 0.0
        out[a:b] = (diff * factor[:, :, None]).sum(axis=1)
    return out


def repulsion_pairs_sum(pos, mass, coefficient: float) -> np.ndarray:
    """Vector sum of all pairwise repulsion forces (zero by action-reaction)."""
    return repulsion_exact(pos, mass, coefficient).sum(axis=0)


def attraction(pos, g: LayoutGraph, delta: float = 1.0, linlog: bool = False) -> np.ndarray:
    out = np.zeros_like(pos)
    if len(g.src) == 0:
        return out
    diff = pos[g.src] - pos[g.dst]
    wd = g.weight ** delta if delta != 1.0 else g.weight
    if linlog:
        d = np.sqrt((diff ** 2).sum(axis=1))
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(d > 0, wd * np.log1p(d) / d, 0.0)
    else:
        factor = wd
    f = diff * factor[:, None]
    np.add.at(out, g.src, -f)
    np.add.at(out, g.dst, f)
    return out


def gravity(pos, mass, k_g: float) -> np.ndarray:
    d = np.sqrt((pos ** 2).sum(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(d > 0, k_g * mass / d, 0.0)
    return -pos * factor[:, None]


def _jitter_directions(nodes) -> np.ndarray:
    angles = np.array([zlib.crc32(str(n).encode("utf-8")) / 2 ** 32 * 2 * math.pi for n in nodes])
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def separate_coincident(pos, directions, eps: float = COINCIDENT_EPS) -> int:
    """Nudge nodes sharing a position by ``eps`` along per-node fixed directions.

    Modifies ``pos`` in place and returns the number of nodes moved.
    """
    order = np.lexsort((pos[:, 1], pos[:, 0]))
    same = np.all(pos[order[1:]] == pos[order[:-1]], axis=1)
    if not same.any():
        return 0
    hit = np.zeros(len(pos), dtype=bool)
    hit[order[1:][same]] = True
    hit[order[:-1][same]] = True
    pos[hit] += eps * directions[hit]
    return int(hit.sum())


def initial_positions(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, 2))


class ForceAtlas2:
    """Stateful runner: keeps positions, previous forces and speed between steps."""

    def __init__(self, graph, config: LayoutConfig | None = None, positions=None):
        self.config = config or LayoutConfig()
        self.config.validate()
        self.g = as_layout_graph(graph)
        if self.g.n == 0:
            raise DataError("cannot lay out an empty graph")
        if positions is None:
            self.pos = initial_positions(self.g.n, self.config.seed)
        else:
            self.pos = np.array([positions[n] for n in self.g.nodes], dtype=np.float64)
        self.old = np.zeros_like(self.pos)
        self.speed = 1.0
        self.speed_efficiency = 1.0
        self.directions = _jitter_directions(self.g.nodes)
        self.barnes_hut = self.config.use_barnes_hut(self.g.n)

    def forces(self) -> np.ndarray:
        cfg, g = self.config, self.g
        if self.barnes_hut:
            f = barnes_hut_repulsion(self.pos, g.mass, cfg.scaling, cfg.theta, cfg.multipole_order)
        else:
            f = repulsion_exact(self.pos, g.mass, cfg.scaling)
        if cfg.gravity:
            f += gravity(self.pos, g.mass, cfg.gravity)
        f += attraction(self.pos, g, cfg.edge_weight_influence, cfg.linlog)
        return f

    def step(self) -> None:
        separate_coincident(self.pos, self.directions)
        f = self.forces()
        mass = self.g.mass
        swing = mass * np.sqrt(((self.old - f) ** 2).sum(axis=1))
        traction = 0.5 * mass * np.sqrt(((self.old + f) ** 2).sum(axis=1))
        self._adjust_speed(float(swing.sum()), float(traction.sum()))
        factor = self.speed / (1.0 + np.sqrt(self.speed * swing))
        self.pos += f * factor[:, None]
        self.old = f

    def _adjust_speed(self, total_swinging: float, total_traction: float) -> None:
        n = self.g.n
        jt_opt = 0.05 * math.sqrt(n)
        jt = self.config.jitter_tolerance * max(
            math.sqrt(jt_opt), min(10.0, jt_opt * total_traction / (n * n)))
        min_efficiency = 0.05
        if total_traction > 0 and total_swinging / total_traction > 2.0:
            if self.speed_efficiency > min_efficiency:
                self.speed_efficiency *= 0.5
            jt = max(jt, self.config.jitter_tolerance)
        if total_swinging == 0:
            target = math.inf
        else:
            target = jt * self.speed_efficiency * total_traction / total_swinging
        if total_swinging > jt * total_traction:
            if self.speed_efficiency > min_efficiency:
                self.speed_efficiency *= 0.7
        elif self.speed < 1000:
            self.speed_efficiency *= 1.3
        self.speed += min(target - self.speed, 0.5 * self.speed)

    def positions(self) -> LayoutPositions:
        return LayoutPositions((n, (float(x), float(y))) for n, (x, y) in zip(self.g.nodes, self.pos))


def layout(graph, config: LayoutConfig | None = None, callback=None, positions=None) -> LayoutPositions:
    """Run ForceAtlas2 for ``config.iterations`` steps.

    Start positions are uniform in [-1, 1]^2 from ``config.seed`` unless
    ``positions`` is given. ``callback(iteration, pos_array)`` is invoked after
    every step. Exact (non-Barnes-Hut) mode is bit-reproducible.
    """
    fa = ForceAtlas2(graph, config, positions)
    for it in range(fa.config.iterations):
        fa.step()
        if not np.all(np.isfinite(fa.pos)):
            raise DataError(f"layout produced non-finite positions at iteration {it}")
        if callback is not None:
            callback(it, fa.pos)
    return fa.positions()


def repulsion_exact_vs_barneshut(graph, positions, theta: float = 1.2, coefficient: float = 2.0,
                                 order: int = DEFAULT_ORDER) -> float:
    """Largest relative error ``|F_bh - F_exact| / |F_exact|`` over nodes."""
    g = as_layout_graph(graph)
    if g.n < 2:
        raise DataError("need at least two nodes")
    pos = np.array([positions[n] for n in g.nodes], dtype=np.float64)
    exact = repulsion_exact(pos, g.mass, coefficient)
    approx = barnes_hut_repulsion(pos, g.mass, coefficient, theta, order)
    num = np.sqrt(((approx - exact) ** 2).sum(axis=1))
    den = np.sqrt((exact ** 2).sum(axis=1))
    rel = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.where(num > 0, np.inf, 0.0))
    return float(rel.max())
