"""The twelve end-to-end acceptance criteria, each reported as one PASS/FAIL line."""

import json
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from conftest import ACCEPTANCE_LINES
from test_classifier import independent_lists, kappa_078_lists, logistic_gradient_check
from test_embedding import sgns_gradient_check
from test_graph import corpus_from_events, random_log
from test_layout import random_graph, two_cliques
from test_lifestage import random_labelings
from tweetdemog.classifier import TrainConfig, evaluate, train
from tweetdemog.dataset import split
from tweetdemog.embedding import (
    AliasTable,
    CommunityAssignment,
    SgnsConfig,
    WalkConfig,
    generate_walks,
    kmeans_communities,
    train_sgns,
    walk_step_weights,
)
from tweetdemog.embedding.walks import make_step_sampler
from tweetdemog.export import read_gexf
from tweetdemog.graph import build_graph, read_edges
from tweetdemog.layout import LayoutConfig, layout, repulsion_exact_vs_barneshut, repulsion_pairs_sum
from tweetdemog.lifestage import (
    LABELS,
    ThresholdConfig,
    classify_corpus,
    compare_methods,
    label_for_fraction,
    read_lifestages,
)
from tweetdemog.metrics import cohen_kappa, normalized_mutual_info
from tweetdemog.pipeline import PipelineConfig, run_pipeline
from tweetdemog.predictions import TweetPrediction
from tweetdemog.synthetic import make_fixture, style_corpus


def verdict(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_01_classifier_on_planted_style():
    t0 = time.perf_counter()
    ds = split(style_corpus(2000, seed=0), (0.8, 0.0, 0.2), seed=0)
    model = train(ds.split_view("train"), TrainConfig(seed=0))
    acc = evaluate(model, ds.split_view("test"))["accuracy"]
    elapsed = time.perf_counter() - t0
    verdict(1, acc >= 0.95 and elapsed < 30,
            f"held-out accuracy {acc:.4f} (>= 0.95) on {len(ds.split_view('test'))} tweets, {elapsed:.1f}s (< 30s)")


def test_02_gradient_checks():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    lr = max(logistic_gradient_check(rng) for _ in range(100))
    sg = max(sgns_gradient_check(rng) for _ in range(100))
    elapsed = time.perf_counter() - t0
    verdict(2, lr < 1e-5 and sg < 1e-5 and elapsed < 10,
            f"max relative error logistic {lr:.2e}, SGNS {sg:.2e} (< 1e-5), {elapsed:.1f}s (< 10s)")


def test_03_alias_sampler():
    t0 = time.perf_counter()
    rng = random.Random(3)
    worst = 0.0
    for _ in range(1000):
        w = [rng.choice([1e-6 + rng.random(), rng.random() * 1e3, rng.randint(1, 9)]) for _ in range(rng.randint(1, 30))]
        implied = AliasTable(w).implied_probabilities()
        worst = max(worst, float(np.abs(np.asarray(implied) - np.asarray(w) / sum(w)).max()))
    draws_rng = np.random.default_rng(0)
    l1s = []
    for w in ([1, 2, 1], [0.1, 0.2, 0.3, 0.4], [5, 1, 1, 1, 1, 0.01, 10]):
        d = AliasTable(w).draw_many(draws_rng, 1_000_000)
        freq = np.bincount(d, minlength=len(w)) / len(d)
        l1s.append(float(np.abs(freq - np.asarray(w) / sum(w)).sum()))
    elapsed = time.perf_counter() - t0
    verdict(3, worst <= 1e-12 and max(l1s) < 0.01 and elapsed < 20,
            f"implied max error {worst:.1e} (<= 1e-12), empirical L1 {max(l1s):.4f} (< 0.01), {elapsed:.1f}s (< 20s)")


PATH = {"a": {"b": 1.0}, "b": {"a": 1.0, "c": 1.0}, "c": {"b": 1.0}}
TRIANGLE = {x: {y: 1.0 for y in "abc" if y != x} for x in "abc"}
WEIGHTED = {
    "a": {"b": 1.0, "c": 2.0},
    "b": {"a": 1.0, "c": 3.0, "d": 1.0, "e": 5.0},
    "c": {"a": 2.0, "b": 3.0},
    "d": {"b": 1.0},
    "e": {"b": 5.0},
}


def test_04_node2vec_bias_rule():
    # back to a: 1/p; c is two hops from a on the path (1/q) and one hop on the triangle (1)
    path_ok = walk_step_weights(PATH, "a", "b", p=2, q=0.5) == {"a": 0.5, "c": 2.0}
    tri_ok = walk_step_weights(TRIANGLE, "a", "b", p=4, q=0.25) == {"a": 0.25, "c": 1.0}
    total = sum(WEIGHTED["b"].values())
    l1s = []
    for pre in (True, False):
        step = make_step_sampler(WEIGHTED, 1.0, 1.0, pre)
        rng = random.Random(17)
        counts = {}
        for _ in range(100_000):
            x = step("a", "b", rng)
            counts[x] = counts.get(x, 0) + 1
        l1s.append(sum(abs(counts.get(x, 0) / 100_000 - w / total) for x, w in WEIGHTED["b"].items()))
    verdict(4, path_ok and tri_ok and max(l1s) < 0.02,
            f"path example {path_ok}, triangle example {tri_ok}, p=q=1 L1 {max(l1s):.4f} (< 0.02)")


def sbm(seed, blocks=4, size=50, p_in=0.3, p_out=0.01):
    rng = np.random.default_rng(seed)
    n = blocks * size
    block = np.repeat(np.arange(blocks), size)
    names = [f"n{i:03d}" for i in range(n)]
    adj = {v: {} for v in names}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < (p_in if block[i] == block[j] else p_out):
                adj[names[i]][names[j]] = adj[names[j]][names[i]] = 1.0
    return adj, dict(zip(names, block.tolist()))


def test_05_community_recovery_sbm():
    t0 = time.perf_counter()
    nmis, share_err = [], 0.0
    for seed in range(5):
        adj, truth = sbm(seed)
        walks = generate_walks(adj, WalkConfig(walk_length=40, walks_per_node=10, seed=seed))
        emb = train_sgns(walks, SgnsConfig(dimensions=64, window=5, epochs=1, seed=seed))
        ca = kmeans_communities(emb, 4, seed)
        nodes = sorted(truth)
        nmis.append(normalized_mutual_info([truth[v] for v in nodes], [ca.labels[v] for v in nodes]))
        share_err = max(share_err, abs(sum(ca.shares) - 1.0))
    elapsed = time.perf_counter() - t0
    ok = all(x >= 0.9 for x in nmis) and share_err <= 1e-9 and elapsed < 120
    verdict(5, ok, f"NMI per seed {[round(x, 3) for x in nmis]} (all >= 0.9), "
                   f"share sum error {share_err:.1e}, {elapsed:.1f}s (< 120s)")


def test_06_threshold_tripartition():
    cfg = ThresholdConfig(0.6, 0.4)
    sweep_ok = True
    for i in range(101):
        f = Fraction(i, 100)
        lab = label_for_fraction(f, cfg)
        expected = "young" if f > Fraction(3, 5) else "adult" if f < Fraction(2, 5) else "underdetermined"
        sweep_ok &= lab == expected
    rng = random.Random(6)
    sums_ok = True
    for _ in range(200):
        by_user = {}
        for u in range(rng.randint(1, 60)):
            n = rng.randint(1, 40)
            k = rng.randint(0, n)
            by_user[f"u{u}"] = [TweetPrediction(f"{u}-{i}", "young" if i < k else "adult", 0.5) for i in range(n)]
        stages, counts = classify_corpus(by_user, cfg)
        sums_ok &= sum(counts.values()) == len(by_user) == len(stages)
    verdict(6, sweep_ok and sums_ok, f"101-point sweep {sweep_ok}, counts sum to n_users on 200 populations {sums_ok}")


def test_07_transition_matrix():
    ok = True
    for seed in range(1000):
        old, new = random_labelings(seed)
        m = compare_methods(old, new)
        ok &= m.row_sums() == {lab: sum(v == lab for v in old.values()) for lab in LABELS}
        ok &= m.column_sums() == {lab: sum(v == lab for v in new.values()) for lab in LABELS}
        ok &= m.changed_fraction == sum(old[u] != new[u] for u in old) / len(old)
    verdict(7, ok, "marginals and changed fraction on 1000 random paired labelings")


def test_08_graph_conservation():
    ok = True
    for seed in range(100):
        events, cohort = random_log(seed)
        g = build_graph(corpus_from_events(events, extra_users=sorted(cohort)), cohort)
        ok &= g.total_weight() + g.self_loops_removed == sum(s in cohort for s, _ in events)
        ok &= all(g.in_degree(v) <= g.in_weight(v) for v in g.nodes)
    verdict(8, ok, "weight conservation and distinct <= total on 100 random retweet logs")


def test_09_forceatlas2():
    rng = np.random.default_rng(9)
    pos = rng.normal(size=(200, 2)) * 10
    mass = rng.integers(1, 10, size=200).astype(float)
    net = float(np.abs(repulsion_pairs_sum(pos, mass, 2.0)).max())
    g = random_graph(200, 0.03, 9)
    layout_pos = {v: tuple(rng.uniform(-100, 100, size=2)) for v in g}
    bh = repulsion_exact_vs_barneshut(g, layout_pos, theta=1.2)
    finite = True
    for seed in range(10):
        def check(it, p):
            nonlocal finite
            finite &= bool(np.isfinite(p).all())
        layout(random_graph(30, 0.15, seed), LayoutConfig(iterations=1000, seed=seed), callback=check)
    placed = layout(two_cliques(), LayoutConfig(iterations=500, seed=0))
    intra, inter = [], []
    names = sorted(placed)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            d = float(np.hypot(placed[a][0] - placed[b][0], placed[a][1] - placed[b][1]))
            (intra if a[0] == b[0] else inter).append(d)
    separated = np.mean(intra) < np.mean(inter)
    verdict(9, net <= 1e-9 and bh < 0.10 and finite and separated,
            f"net repulsion {net:.1e} (<= 1e-9), Barnes-Hut error {bh:.4f} (< 0.10), "
            f"finite {finite}, cliques separated {separated}")


def test_10_kappa():
    same = cohen_kappa(list("abcab"), list("abcab"))
    indep = cohen_kappa(*independent_lists())
    balanced = cohen_kappa(*kappa_078_lists())
    verdict(10, same == 1.0 and abs(indep) <= 1e-12 and balanced == 0.56,
            f"identical {same}, independent {indep:.1e}, p_o=0.78 balanced {balanced}")


def _fixture_scores(out_dir, truth):
    stages = {s.user_id: s.label for s in read_lifestages(out_dir / "lifestages.csv")}
    clear = [u for u, lab in truth["lifestage"].items() if lab in ("young", "adult")]
    recovery = sum(stages.get(u) == truth["lifestage"][u] for u in clear) / len(clear)
    comms = CommunityAssignment.from_csv(out_dir / "communities.csv").labels
    planted = [v for v in sorted(comms) if v in truth["community"]]
    nmi = normalized_mutual_info([truth["community"][v] for v in planted], [comms[v] for v in planted])
    return recovery, nmi, len(planted)


def _gexf_round_trips(out_dir):
    g = read_edges(out_dir / "edges.csv")
    back = read_gexf(out_dir / "graph.gexf")
    stages = {s.user_id: s.label for s in read_lifestages(out_dir / "lifestages.csv")}
    comms = CommunityAssignment.from_csv(out_dir / "communities.csv").labels
    positions = {}
    for line in (out_dir / "positions.csv").read_text(encoding="utf-8").splitlines()[1:]:
        node, x, y = line.split(",")
        positions[node] = (float(x), float(y))
    return (list(back.graph.edges()) == list(g.edges())
            and back.positions == positions
            and back.communities == {v: comms[v] for v in g.nodes}
            and back.lifestages == {v: stages[v] for v in g.nodes if v in stages})


def _run_fixture(root, output_dir="run"):
    cfg = PipelineConfig.load(root / "pipeline.toml")
    cfg.output_dir = str(root / output_dir)
    run_pipeline(cfg)
    return Path(cfg.output_dir)


def test_11_end_to_end_rehearsal(tmp_path):
    truth = make_fixture(tmp_path, seed=0).to_json()
    t0 = time.perf_counter()
    out = _run_fixture(tmp_path)
    elapsed = time.perf_counter() - t0
    recovery, nmi, n_planted = _fixture_scores(out, truth)
    round_trip = _gexf_round_trips(out)
    verdict(11, elapsed < 300 and recovery >= 0.9 and nmi >= 0.8 and round_trip,
            f"run {elapsed:.1f}s (< 300s), lifestage recovery {recovery:.3f} (>= 0.9), "
            f"community NMI {nmi:.3f} over {n_planted} nodes (>= 0.8), GEXF round trip {round_trip}")


def test_12_determinism(tmp_path):
    make_fixture(tmp_path, seed=5)
    a, b = _run_fixture(tmp_path, "first"), _run_fixture(tmp_path, "second")
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    differing = [str(p) for p in files_a if p not in files_b or (a / p).read_bytes() != (b / p).read_bytes()]
    report = json.loads((a / "report.json").read_text(encoding="utf-8"))
    verdict(12, files_a == files_b and not differing and "timings_seconds" not in report,
            f"{len(files_a)} output files byte-identical across reruns; differing: {differing or 'none'}")
