import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tweetdemog.errors import DataError, ParameterError
from tweetdemog.layout import (
    ForceAtlas2,
    LayoutConfig,
    LayoutPositions,
    as_layout_graph,
    barnes_hut_repulsion,
    layout,
    repulsion_exact,
    repulsion_exact_vs_barneshut,
    repulsion_pairs_sum,
)
from tweetdemog.layout.forceatlas2 import attraction, initial_positions, separate_coincident


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    adj = {i: {} for i in range(n)}
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            w = float(rng.integers(1, 4))
            adj[i][j] = adj[j][i] = w
    return {f"v{i:03d}": {f"v{j:03d}": w for j, w in nb.items()} for i, nb in adj.items()}


def test_zero_iterations_returns_initial_positions():
    g = random_graph(10, 0.3, 0)
    pos = layout(g, LayoutConfig(iterations=0, seed=4))
    init = initial_positions(10, 4)
    assert [pos[n] for n in sorted(pos)] == [tuple(r) for r in init]


def test_two_disconnected_nodes_separate_to_equilibrium():
    g = {"a": {}, "b": {}}
    dists = []
    layout(g, LayoutConfig(iterations=300, seed=1),
           callback=lambda it, p: dists.append(float(np.linalg.norm(p[0] - p[1]))))
    # repulsion k_r/d balances gravity k_g per node: d* = k_r / k_g = 2
    equilibrium = 2.0
    rising = [d for d in dists if d < 0.99 * equilibrium]
    assert len(rising) > 3
    assert all(b > a for a, b in zip(rising, rising[1:]))
    assert dists[-1] == pytest.approx(equilibrium, rel=1e-6)


def two_cliques():
    adj = {}
    for block in "pq":
        members = [f"{block}{i}" for i in range(10)]
        for m in members:
            adj[m] = {o: 1.0 for o in members if o != m}
    adj["p0"]["q0"] = adj["q0"]["p0"] = 1.0
    return adj


def test_two_cliques_separate():
    pos = layout(two_cliques(), LayoutConfig(iterations=500, seed=0))
    intra, inter = [], []
    for a, b in itertools.combinations(sorted(pos), 2):
        d = np.hypot(pos[a][0] - pos[b][0], pos[a][1] - pos[b][1])
        (intra if a[0] == b[0] else inter).append(d)
    assert np.mean(intra) < np.mean(inter)


def test_exact_repulsion_newton_third_law():
    rng = np.random.default_rng(3)
    pos = rng.normal(size=(150, 2)) * 10
    mass = rng.integers(1, 10, size=150).astype(float)
    assert np.abs(repulsion_pairs_sum(pos, mass, 2.0)).max() < 1e-9


def test_exact_repulsion_pair_formula():
    pos = np.array([[0.0, 0.0], [3.0, 4.0]])
    f = repulsion_exact(pos, np.array([2.0, 3.0]), 2.0)
    # magnitude k * m1 * m2 / d = 2 * 6 / 5, pointing away from the other node
    assert np.allclose(f[1], np.array([3.0, 4.0]) / 5 * 2.4)
    assert np.allclose(f[0], -f[1])


def test_barnes_hut_theta_limit_is_exact():
    rng = np.random.default_rng(5)
    g = random_graph(120, 0.05, 5)
    pos = {n: tuple(rng.normal(size=2) * 20) for n in g}
    assert repulsion_exact_vs_barneshut(g, pos, theta=1e-3) < 1e-9


def test_barnes_hut_two_nodes_exact():
    g = {"a": {"b": 1.0}, "b": {"a": 1.0}}
    assert repulsion_exact_vs_barneshut(g, {"a": (0.0, 0.0), "b": (1.0, 2.0)}) == 0.0


def test_barnes_hut_error_shrinks_with_theta():
    rng = np.random.default_rng(2)
    g = random_graph(200, 0.03, 2)
    pos = {n: tuple(rng.uniform(-100, 100, size=2)) for n in g}
    errs = [repulsion_exact_vs_barneshut(g, pos, theta=t) for t in (2.0, 1.2, 0.5)]
    assert errs[0] >= errs[1] >= errs[2]
    assert errs[1] < 0.10


def test_barnes_hut_clustered_positions():
    # many nearly coincident points stress the quadtree depth
    rng = np.random.default_rng(0)
    pos = np.vstack([rng.normal(scale=1e-7, size=(50, 2)), rng.normal(size=(50, 2)) * 100])
    mass = np.ones(100)
    exact = repulsion_exact(pos, mass, 1.0)
    approx = barnes_hut_repulsion(pos, mass, 1.0, 1.2)
    rel = np.linalg.norm(approx - exact, axis=1) / np.linalg.norm(exact, axis=1)
    assert rel.max() < 0.10


@given(st.integers(0, 1000), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_forces_translation_equivariant(seed, dx, dy):
    g = as_layout_graph(random_graph(15, 0.3, seed))
    pos = np.random.default_rng(seed).normal(size=(15, 2)) * 5
    shifted = pos + np.array([dx, dy])
    for fn in (lambda p: repulsion_exact(p, g.mass, 2.0), lambda p: attraction(p, g),
               lambda p: attraction(p, g, linlog=True)):
        assert np.abs(fn(pos) - fn(shifted)).max() < 1e-9


def test_no_nan_ten_graphs_thousand_iterations():
    for seed in range(10):
        g = random_graph(30, 0.15, seed)
        layout(g, LayoutConfig(iterations=1000, seed=seed),
               callback=lambda it, p: np.testing.assert_(np.isfinite(p).all()))


def test_linlog_and_barnes_hut_modes_run():
    g = random_graph(60, 0.08, 1)
    for cfg in (LayoutConfig(iterations=200, linlog=True), LayoutConfig(iterations=200, barnes_hut=True)):
        pos = layout(g, cfg)
        assert np.isfinite(np.array(list(pos.values()))).all()


def test_layout_deterministic():
    g = random_graph(40, 0.1, 7)
    assert layout(g, LayoutConfig(iterations=100, seed=2)) == layout(g, LayoutConfig(iterations=100, seed=2))


def test_coincident_nodes_separated():
    pos = np.zeros((3, 2))
    dirs = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    assert separate_coincident(pos, dirs) == 3
    assert len({tuple(r) for r in pos}) == 3


def test_coincident_start_stays_finite():
    g = two_cliques()
    pos = layout(g, LayoutConfig(iterations=50), positions={n: (0.0, 0.0) for n in g})
    assert np.isfinite(np.array(list(pos.values()))).all()


def test_empty_graph_rejected():
    with pytest.raises(DataError):
        ForceAtlas2({})


def test_bad_config_rejected():
    with pytest.raises(ParameterError):
        layout(two_cliques(), LayoutConfig(theta=0))


def test_positions_csv_round_trip(tmp_path):
    pos = LayoutPositions({"a": (0.1, -2.5), "b": (1e-17, 3.0)})
    pos.to_csv(tmp_path / "p.csv")
    assert LayoutPositions.from_csv(tmp_path / "p.csv") == pos
