import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import record
from tweetdemog.corpus import Corpus, tweet_from_record
from tweetdemog.errors import DataError
from tweetdemog.graph import (
    RetweetGraph,
    build_graph,
    rank_distinct_retweeters,
    rank_total_retweets,
    read_edges,
    write_edges,
)


def corpus_from_events(events, extra_users=(), lang="eu"):
    """``events`` are (retweeter, retweeted) pairs."""
    tweets = [tweet_from_record(record(f"t{i}", s, text="RT", lang=lang, minutes=i, rt=t))
              for i, (s, t) in enumerate(events)]
    tweets += [tweet_from_record(record(f"o{u}", u)) for u in extra_users]
    return Corpus.from_tweets(tweets)


def example_graph():
    return build_graph(corpus_from_events([("A", "B"), ("A", "B"), ("C", "B")]), {"A", "C"})


def test_build_example():
    g = example_graph()
    assert set(g.nodes) == {"A", "B", "C"}
    assert list(g.edges()) == [("A", "B", 2), ("C", "B", 1)]
    assert g.nodes["A"]["in_sample"] and not g.nodes["B"]["in_sample"]


def test_no_retweets_empty_graph():
    g = build_graph(corpus_from_events([], extra_users=["A"]), {"A"})
    assert g.n_nodes == 0 and g.n_edges == 0


def test_self_loop_dropped():
    g = build_graph(corpus_from_events([("A", "A"), ("A", "B")]), {"A"})
    assert g.self_loops_removed == 1
    assert list(g.edges()) == [("A", "B", 1)]


def test_non_basque_retweets_skipped():
    g = build_graph(corpus_from_events([("A", "B")], lang="es"), {"A"})
    assert g.n_edges == 0 and g.non_basque_skipped == 1
    g = build_graph(corpus_from_events([("A", "B")], lang="es"), {"A"}, basque_only=False)
    assert g.n_edges == 1


def test_only_cohort_retweets_count():
    g = build_graph(corpus_from_events([("A", "B"), ("D", "B")]), {"A"})
    assert list(g.edges()) == [("A", "B", 1)]


def test_cohort_user_missing_from_corpus():
    with pytest.raises(DataError):
        build_graph(corpus_from_events([("A", "B")]), {"A", "ghost"})


def test_rankings_example():
    g = example_graph()
    assert rank_total_retweets(g).entries[0] == ("B", 3)
    assert rank_distinct_retweeters(g).entries[0] == ("B", 2)
    assert len(rank_total_retweets(g, top_k=50).entries) == 3


def test_ranking_ties_by_user_id():
    g = build_graph(corpus_from_events([("A", "Y"), ("A", "X")]), {"A"})
    assert [u for u, _ in rank_total_retweets(g).entries[:2]] == ["X", "Y"]


def test_star_definitions_diverge():
    events = [(f"r{i}", "hub") for i in range(5) for _ in range(10)]
    g = build_graph(corpus_from_events(events), {f"r{i}" for i in range(5)})
    assert dict(rank_total_retweets(g).entries)["hub"] == 50
    assert dict(rank_distinct_retweeters(g).entries)["hub"] == 5


def test_isolated_node_excluded_from_top_k():
    g = example_graph()
    g.add_node("Z", in_sample=True)
    assert dict(rank_distinct_retweeters(g).entries)["Z"] == 0
    assert "Z" not in dict(rank_distinct_retweeters(g, top_k=3).entries)


def test_rejects_bad_edges():
    g = RetweetGraph()
    with pytest.raises(DataError):
        g.add_edge("a", "a")
    with pytest.raises(DataError):
        g.add_edge("a", "b", 0)


def test_ranking_csv(tmp_path):
    rank_total_retweets(example_graph()).to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "rank,user_id,value,kind"
    assert lines[1] == "1,B,3,total_retweets"


def test_edges_round_trip(tmp_path):
    g = example_graph()
    write_edges(g, tmp_path / "e.csv")
    back = read_edges(tmp_path / "e.csv")
    assert list(back.edges()) == list(g.edges())


def random_log(seed):
    rng = random.Random(seed)
    users = [f"u{i}" for i in range(rng.randint(1, 12))]
    cohort = set(rng.sample(users, rng.randint(1, len(users))))
    targets = users + [f"x{i}" for i in range(5)]
    events = [(rng.choice(users), rng.choice(targets)) for _ in range(rng.randint(0, 80))]
    return events, cohort


def test_conservation_hundred_logs():
    for seed in range(100):
        events, cohort = random_log(seed)
        corpus = corpus_from_events(events, extra_users=sorted(cohort))
        g = build_graph(corpus, cohort)
        in_sample_records = sum(s in cohort for s, _ in events)
        assert g.total_weight() + g.self_loops_removed == in_sample_records
        for v in g.nodes:
            assert g.in_degree(v) <= g.in_weight(v)


@given(st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_build_order_independent(seed, rnd):
    events, cohort = random_log(seed)
    shuffled = list(events)
    rnd.shuffle(shuffled)
    a = build_graph(corpus_from_events(events, sorted(cohort)), cohort)
    b = build_graph(corpus_from_events(shuffled, sorted(cohort)), cohort)
    assert a == b


@given(st.integers(0, 10_000))
def test_node_count_bound(seed):
    events, cohort = random_log(seed)
    g = build_graph(corpus_from_events(events, sorted(cohort)), cohort)
    targets = {t for s, t in events if s in cohort and s != t}
    assert g.n_nodes <= len(cohort) + len(targets)
    if not targets & cohort:
        sources = {s for s, t in events if s in cohort and s != t}
        assert g.n_nodes == len(sources) + len(targets)
