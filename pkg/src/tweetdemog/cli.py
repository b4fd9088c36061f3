"""Command-line interface: one subcommand per stage plus ``run`` for the whole pipeline.

Exit codes: 0 success, 1 usage or parameter error, 2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from tweetdemog import __version__
from tweetdemog.errors import DataError, ParameterError, StageError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("tweetdemog")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _pick(value, default):
    return default if value is None else value


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False))


def _ratios(text: str):
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three ratios train,dev,test")
    return parts


def _load_config(args):
    from tweetdemog.pipeline import PipelineConfig

    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


# -- subcommands -----------------------------------------------------------

def cmd_ingest(args, cfg):
    from tweetdemog.corpus import basque_users, ingest

    corpus = ingest(args.input)
    users = sorted(basque_users(corpus, _pick(args.min_fraction, cfg.basque.min_fraction)))
    stats = corpus.stats().to_json() | {"basque_users": len(users)}
    if args.basque_out:
        Path(args.basque_out).write_text("".join(u + "\n" for u in users), encoding="utf-8")
    if args.stats_out:
        Path(args.stats_out).write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _print_json(stats)


def cmd_build_dataset(args, cfg):
    from tweetdemog.corpus import ingest
    from tweetdemog.dataset import build_dataset, split_counts
    from tweetdemog.predictions import group_by_user, read_predictions

    corpus = ingest(args.corpus)
    by_user = group_by_user(read_predictions(args.predictions), corpus)
    d = cfg.dataset
    ds = build_dataset(corpus, by_user, _pick(args.n_per_class, d.n_per_class),
                       _pick(args.per_user, d.per_user), cfg.stage_seed("dataset"),
                       _pick(args.ratios, tuple(d.ratios)))
    ds.to_jsonl(args.out)
    _print_json(split_counts(ds))


def _train_config(args, cfg, stage="train"):
    from tweetdemog.classifier import TrainConfig

    c = cfg.classifier
    return TrainConfig(
        learning_rate=_pick(args.learning_rate, c.learning_rate),
        epochs=_pick(args.epochs, c.epochs),
        l2=_pick(args.l2, c.l2),
        min_feature_freq=_pick(args.min_feature_freq, c.min_feature_freq),
        seed=cfg.stage_seed(stage),
        lexicon_paths=list(args.lexicon or c.lexicons),
    )


def cmd_train(args, cfg):
    from tweetdemog.classifier import train
    from tweetdemog.dataset import LabeledDataset

    ds = LabeledDataset.from_jsonl(args.dataset)
    if args.split != "all":
        ds = ds.split_view(args.split)
    model = train(ds, _train_config(args, cfg))
    model.save(args.out)
    _print_json({"examples": len(ds), "features": len(model.vocabulary), "labels": list(model.labels)})


def cmd_predict(args, cfg):
    from tweetdemog.classifier import LinearModel, predict_corpus
    from tweetdemog.corpus import basque_users, ingest
    from tweetdemog.predictions import write_predictions

    corpus = ingest(args.corpus)
    if args.basque_only:
        corpus = corpus.subset(basque_users(corpus, cfg.basque.min_fraction))
    preds = predict_corpus(LinearModel.load(args.model), corpus.tweets())
    write_predictions(preds, args.out)
    counts = {}
    for p in preds:
        counts[p.label] = counts.get(p.label, 0) + 1
    _print_json({"tweets": len(preds), "labels": dict(sorted(counts.items()))})


def cmd_evaluate(args, cfg):
    from tweetdemog.classifier import LinearModel, evaluate
    from tweetdemog.dataset import LabeledDataset

    ds = LabeledDataset.from_jsonl(args.dataset)
    if args.split != "all":
        ds = ds.split_view(args.split)
    metrics = evaluate(LinearModel.load(args.model), ds)
    if args.out:
        Path(args.out).write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _print_json(metrics)


def cmd_aggregate(args, cfg):
    from tweetdemog.corpus import ingest
    from tweetdemog.lifestage import ThresholdConfig, classify_corpus, write_lifestages
    from tweetdemog.predictions import group_by_user, read_predictions

    ls = cfg.lifestage
    corpus = ingest(args.corpus)
    by_user = group_by_user(read_predictions(args.predictions), corpus,
                            args.originals_only or ls.originals_only)
    thresholds = ThresholdConfig(_pick(args.upper, ls.upper), _pick(args.lower, ls.lower))
    stages, counts = classify_corpus(by_user, thresholds, args.mean_probability or ls.mean_probability)
    write_lifestages(stages, args.out)
    _print_json({"counts": counts, "n_users": len(stages)})


def cmd_compare(args, cfg):
    from tweetdemog.lifestage import compare_methods, read_lifestages

    old = {s.user_id: s.label for s in read_lifestages(args.old)}
    new = {s.user_id: s.label for s in read_lifestages(args.new)}
    m = compare_methods(old, new)
    if args.out:
        m.to_csv(args.out)
    _print_json({
        "n_users": m.n_users,
        "changed": m.n_changed,
        "changed_percent": round(100 * m.changed_fraction, 2),
        "old_counts": m.row_sums(),
        "new_counts": m.column_sums(),
        "matrix": {f"{a}->{b}": n for (a, b), n in sorted(m.counts.items())},
    })


def cmd_graph(args, cfg):
    from tweetdemog.corpus import ingest
    from tweetdemog.graph import build_graph, write_edges
    from tweetdemog.lifestage import read_lifestages

    corpus = ingest(args.corpus)
    young = [s.user_id for s in read_lifestages(args.lifestages) if s.label == "young"]
    g = build_graph(corpus, young, basque_only=not args.all_languages and cfg.graph.basque_only)
    write_edges(g, args.out)
    _print_json(g.stats())


def cmd_rank(args, cfg):
    from tweetdemog.graph import rank_distinct_retweeters, rank_total_retweets, read_edges

    g = read_edges(args.edges)
    top_k = _pick(args.top_k, cfg.graph.top_k)
    rankers = {"total": rank_total_retweets, "distinct": rank_distinct_retweeters}
    kinds = ["total", "distinct"] if args.kind == "both" else [args.kind]
    if args.out and len(kinds) > 1:
        raise UsageError("--out needs a single --kind; use --out-dir for both rankings")
    result = {}
    for kind in kinds:
        r = rankers[kind](g, top_k)
        if args.out:
            r.to_csv(args.out)
        else:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            r.to_csv(out / f"ranking_{r.kind}.csv")
        result[r.kind] = [[u, v] for u, v in r.entries]
    _print_json(result)


def cmd_embed(args, cfg):
    from tweetdemog.embedding import SgnsConfig, WalkConfig, node2vec
    from tweetdemog.graph import read_edges

    g = read_edges(args.edges)
    w, s = cfg.walks, cfg.sgns
    wc = WalkConfig(_pick(args.p, w.p), _pick(args.q, w.q), _pick(args.walk_length, w.walk_length),
                    _pick(args.walks_per_node, w.walks_per_node), cfg.stage_seed("walks"))
    sc = SgnsConfig(_pick(args.dimensions, s.dimensions), _pick(args.window, s.window),
                    _pick(args.negatives, s.negatives), _pick(args.epochs, s.epochs),
                    _pick(args.learning_rate, s.learning_rate), cfg.stage_seed("sgns"))
    emb = node2vec(g.undirected(), wc, sc)
    emb.save(args.out)
    _print_json({"nodes": len(emb), "dimensions": emb.dimensions})


def cmd_communities(args, cfg):
    from tweetdemog.embedding import EmbeddingMatrix, characterize_communities, kmeans_communities
    from tweetdemog.graph import read_edges

    g = read_edges(args.edges)
    c = cfg.communities
    a = kmeans_communities(EmbeddingMatrix.load(args.embeddings), _pick(args.k, c.k),
                           cfg.stage_seed("communities"), nodes=g.nodes,
                           n_init=_pick(args.n_init, c.n_init))
    a.to_csv(args.out)
    _print_json(characterize_communities(a, g, _pick(args.top_n, c.top_n)))


def cmd_layout(args, cfg):
    from tweetdemog.graph import read_edges
    from tweetdemog.layout import LayoutConfig, layout

    lc = cfg.layout
    conf = LayoutConfig(
        iterations=_pick(args.iterations, lc.iterations), scaling=_pick(args.scaling, lc.scaling),
        gravity=_pick(args.gravity, lc.gravity), linlog=args.linlog or lc.linlog,
        barnes_hut=_pick(args.barnes_hut, lc.barnes_hut), theta=_pick(args.theta, lc.theta),
        seed=cfg.stage_seed("layout"),
    )
    pos = layout(read_edges(args.edges), conf)
    pos.to_csv(args.out)
    _print_json({"nodes": len(pos), "iterations": conf.iterations})


def _graph_with_sample_flags(edges_path, lifestages):
    from tweetdemog.graph import read_edges

    g = read_edges(edges_path)
    if lifestages is not None:
        for node, attrs in g.nodes.items():
            attrs["in_sample"] = lifestages.get(node) == "young"
    return g


def cmd_export_gexf(args, cfg):
    from tweetdemog.embedding import CommunityAssignment
    from tweetdemog.export import export_gexf
    from tweetdemog.layout import LayoutPositions
    from tweetdemog.lifestage import read_lifestages

    stages = {s.user_id: s.label for s in read_lifestages(args.lifestages)} if args.lifestages else None
    g = _graph_with_sample_flags(args.edges, stages)
    comms = CommunityAssignment.from_csv(args.communities).labels if args.communities else None
    pos = LayoutPositions.from_csv(args.positions) if args.positions else None
    export_gexf(g, args.out, stages, comms, pos)
    _print_json({"nodes": g.n_nodes, "edges": g.n_edges})


def cmd_render_svg(args, cfg):
    from tweetdemog.embedding import CommunityAssignment
    from tweetdemog.export import render_svg
    from tweetdemog.graph import read_edges
    from tweetdemog.layout import LayoutPositions

    g = read_edges(args.edges)
    comms = CommunityAssignment.from_csv(args.communities).labels if args.communities else {}
    r = cfg.render
    render_svg(LayoutPositions.from_csv(args.positions), comms, g, args.out,
               r.width, r.height, max_edges=_pick(args.max_edges, r.max_edges))


def cmd_run(args, cfg):
    from tweetdemog.pipeline import run_pipeline

    for key in ("corpus", "predictions", "model", "style_seed", "output_dir"):
        value = getattr(args, key)
        if value is not None:
            setattr(cfg, key, value)
    if args.train:
        cfg.train = True
    if args.resume:
        cfg.resume = True
    if args.timings:
        cfg.deterministic = False
    report = run_pipeline(cfg)
    _print_json({k: report[k] for k in ("basque_users", "lifestage", "graph") if k in report}
                | {"communities": report["communities"]["shares"], "output_dir": str(cfg.output_dir)})


def cmd_make_fixture(args, cfg):
    from tweetdemog.synthetic import make_fixture

    truth = make_fixture(args.out_dir, cfg.seed)
    _print_json({"tweets": truth.n_tweets, "basque_users": len(truth.basque),
                 "out_dir": str(args.out_dir), "config": str(Path(args.out_dir) / "pipeline.toml")})


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="global seed (overrides the config file)")
    common.add_argument("--config", help="TOML or JSON pipeline configuration")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="tweetdemog", description="Life-stage inference and retweet-network analysis.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("ingest", cmd_ingest, "load a JSONL corpus and report statistics")
    sp.add_argument("--input", required=True)
    sp.add_argument("--min-fraction", type=float)
    sp.add_argument("--basque-out", help="write Basque user ids here")
    sp.add_argument("--stats-out")

    sp = add("build-dataset", cmd_build_dataset, "rank users by informal share and sample a labelled dataset")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--predictions", required=True, help="formal/informal tweet predictions (TSV)")
    sp.add_argument("--out", required=True)
    sp.add_argument("--n-per-class", type=int)
    sp.add_argument("--per-user", type=int)
    sp.add_argument("--ratios", type=_ratios, help="train,dev,test")

    def classifier_opts(sp):
        sp.add_argument("--epochs", type=int)
        sp.add_argument("--learning-rate", type=float)
        sp.add_argument("--l2", type=float)
        sp.add_argument("--min-feature-freq", type=int)
        sp.add_argument("--lexicon", action="append", help="cluster lexicon TSV (up to 3)")

    sp = add("train", cmd_train, "train the linear tweet classifier")
    sp.add_argument("--data", "--dataset", dest="dataset", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--split", default="train", choices=["train", "dev", "test", "all"])
    classifier_opts(sp)

    sp = add("predict", cmd_predict, "label every tweet of a corpus")
    sp.add_argument("--model", required=True)
    sp.add_argument("--in", "--corpus", dest="corpus", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--basque-only", action="store_true")

    sp = add("evaluate", cmd_evaluate, "accuracy/precision/recall/F1 on a dataset split")
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", "--dataset", dest="dataset", required=True)
    sp.add_argument("--split", default="test", choices=["train", "dev", "test", "all"])
    sp.add_argument("--out")

    sp = add("aggregate", cmd_aggregate, "turn tweet predictions into per-user life stages")
    sp.add_argument("--predictions", required=True)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--upper", type=float)
    sp.add_argument("--lower", type=float)
    sp.add_argument("--originals-only", action="store_true", help="ignore retweets")
    sp.add_argument("--mean-probability", action="store_true",
                    help="use the mean young probability instead of the label share")

    sp = add("compare", cmd_compare, "transition matrix between two life-stage labelings")
    sp.add_argument("--old", required=True)
    sp.add_argument("--new", required=True)
    sp.add_argument("--out")

    sp = add("graph", cmd_graph, "build the retweet graph of the young cohort")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--lifestages", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--all-languages", action="store_true", help="keep non-Basque retweets")

    sp = add("rank", cmd_rank, "influencer rankings by total retweets and distinct retweeters")
    sp.add_argument("--graph", "--edges", dest="edges", required=True)
    sp.add_argument("--kind", choices=["total", "distinct", "both"], default="both")
    sp.add_argument("--top", "--top-k", dest="top_k", type=int)
    sp.add_argument("--out", help="CSV path when a single --kind is ranked")
    sp.add_argument("--out-dir", default=".", help="directory for both rankings")

    sp = add("embed", cmd_embed, "node2vec embeddings of the retweet graph")
    sp.add_argument("--graph", "--edges", dest="edges", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--dims", "--dimensions", dest="dimensions", type=int)
    for name, typ in (("p", float), ("q", float), ("walk-length", int), ("walks-per-node", int),
                      ("window", int), ("negatives", int), ("epochs", int), ("learning-rate", float)):
        sp.add_argument(f"--{name}", type=typ)

    sp = add("communities", cmd_communities, "k-means communities on the embeddings")
    sp.add_argument("--embeddings", required=True)
    sp.add_argument("--graph", "--edges", dest="edges", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--k", type=int)
    sp.add_argument("--n-init", type=int)
    sp.add_argument("--top-n", type=int)

    sp = add("layout", cmd_layout, "ForceAtlas2 positions")
    sp.add_argument("--graph", "--edges", dest="edges", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--scaling", type=float)
    sp.add_argument("--gravity", type=float)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--linlog", action="store_true")
    bh = sp.add_mutually_exclusive_group()
    bh.add_argument("--barnes-hut", dest="barnes_hut", action="store_const", const=True)
    bh.add_argument("--exact", dest="barnes_hut", action="store_const", const=False)

    sp = add("export-gexf", cmd_export_gexf, "write a GEXF file for gephi")
    sp.add_argument("--graph", "--edges", dest="edges", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--lifestages")
    sp.add_argument("--communities")
    sp.add_argument("--positions")

    sp = add("render-svg", cmd_render_svg, "static SVG map coloured by community")
    sp.add_argument("--graph", "--edges", dest="edges", required=True)
    sp.add_argument("--positions", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--communities")
    sp.add_argument("--max-edges", type=int)

    sp = add("run", cmd_run, "run the whole pipeline")
    sp.add_argument("--corpus")
    sp.add_argument("--predictions")
    sp.add_argument("--model")
    sp.add_argument("--style-seed")
    sp.add_argument("--output-dir")
    sp.add_argument("--train", action="store_true", help="bootstrap and train the classifier first")
    sp.add_argument("--resume", action="store_true", help="reuse artifacts already in the output dir")
    sp.add_argument("--timings", action="store_true", help="record stage timings (report no longer reproducible)")

    sp = add("make-fixture", cmd_make_fixture, "write a synthetic corpus with planted labels")
    sp.add_argument("--out-dir", required=True)
    return p


def _exit_code(exc) -> int:
    if isinstance(exc, StageError):
        return _exit_code(exc.cause)
    if isinstance(exc, (UsageError, ParameterError)):
        return EXIT_USAGE
    if isinstance(exc, DataError):
        return EXIT_DATA
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_DATA


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load_config(args)
        args.func(args, cfg)
    except (UsageError, StageError, ParameterError, DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
