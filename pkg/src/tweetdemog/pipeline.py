"""End-to-end pipeline: tweets in, life stages, rankings, communities and maps out.

Each stage writes its artifacts into ``output_dir``; with ``resume`` a stage
whose artifacts already exist is loaded from disk instead of recomputed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from tweetdemog import classifier as clf
from tweetdemog import plotting
from tweetdemog.corpus import basque_users, ingest
from tweetdemog.dataset import LabeledDataset, build_dataset, split_counts
from tweetdemog.embedding import (
    CommunityAssignment,
    EmbeddingMatrix,
    SgnsConfig,
    WalkConfig,
    characterize_communities,
    kmeans_communities,
    node2vec,
)
from tweetdemog.errors import DataError, ParameterError, StageError, TweetDemogError
from tweetdemog.export import export_gexf, render_svg
from tweetdemog.graph import build_graph, rank_distinct_retweeters, rank_total_retweets, read_edges, write_edges
from tweetdemog.layout import LayoutConfig, LayoutPositions, layout
from tweetdemog.lifestage import (
    ThresholdConfig,
    class_counts,
    classify_corpus,
    read_lifestages,
    write_lifestages,
)
from tweetdemog.predictions import group_by_user, read_predictions, write_predictions

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)


@dataclass
class BasqueSection:
    min_fraction: float = 0.20


@dataclass
class DatasetSection:
    n_per_class: int = 500
    per_user: int = 100
    ratios: tuple = (0.6, 0.2, 0.2)


@dataclass
class ClassifierSection:
    learning_rate: float = 0.1
    epochs: int = 10
    l2: float = 1e-5
    min_feature_freq: int = 2
    lexicons: list = field(default_factory=list)


@dataclass
class LifestageSection:
    upper: float = 0.60
    lower: float = 0.40
    mean_probability: bool = False
    originals_only: bool = False


@dataclass
class GraphSection:
    basque_only: bool = True
    top_k: int = 20


@dataclass
class WalksSection:
    p: float = 1.0
    q: float = 0.5
    walk_length: int = 80
    walks_per_node: int = 10


@dataclass
class SgnsSection:
    dimensions: int = 128
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025


@dataclass
class CommunitiesSection:
    k: int = 4
    n_init: int = 10
    top_n: int = 10


@dataclass
class LayoutSection:
    iterations: int = 1000
    scaling: float = 2.0
    gravity: float = 1.0
    linlog: bool = False
    barnes_hut: bool | None = None
    theta: float = 1.2


@dataclass
class RenderSection:
    width: int = 800
    height: int = 800
    max_edges: int = 5000
    figures: bool = True


_SECTIONS = {
    "basque": BasqueSection, "dataset": DatasetSection, "classifier": ClassifierSection,
    "lifestage": LifestageSection, "graph": GraphSection, "walks": WalksSection,
    "sgns": SgnsSection, "communities": CommunitiesSection, "layout": LayoutSection,
    "render": RenderSection,
}
_PATH_KEYS = ("corpus", "predictions", "model", "style_seed", "style_predictions", "output_dir")


@dataclass
class PipelineConfig:
    """Inputs, outputs and every stage's settings.

    Without ``train`` the per-tweet life-stage labels come from
    ``predictions`` (a TSV) or are computed with a saved ``model``. With
    ``train`` a classifier is bootstrapped from ``style_seed`` (formal and
    informal examples) or ``style_predictions``.
    """

    corpus: str = ""
    output_dir: str = "out"
    predictions: str | None = None
    model: str | None = None
    style_seed: str | None = None
    style_predictions: str | None = None
    train: bool = False
    seed: int = 0
    resume: bool = False
    deterministic: bool = True
    basque: BasqueSection = field(default_factory=BasqueSection)
    dataset: DatasetSection = field(default_factory=DatasetSection)
    classifier: ClassifierSection = field(default_factory=ClassifierSection)
    lifestage: LifestageSection = field(default_factory=LifestageSection)
    graph: GraphSection = field(default_factory=GraphSection)
    walks: WalksSection = field(default_factory=WalksSection)
    sgns: SgnsSection = field(default_factory=SgnsSection)
    communities: CommunitiesSection = field(default_factory=CommunitiesSection)
    layout: LayoutSection = field(default_factory=LayoutSection)
    render: RenderSection = field(default_factory=RenderSection)

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> PipelineConfig:
        """Build from a parsed TOML/JSON mapping; relative paths resolve against ``base_dir``."""
        data = dict(data)
        kwargs = {}
        top = {f.name for f in dataclasses.fields(cls)} - set(_SECTIONS)
        for key, value in data.items():
            if key in _SECTIONS:
                if not isinstance(value, dict):
                    raise ParameterError(f"[{key}] must be a table")
                kwargs[key] = _section(_SECTIONS[key], key, value)
            elif key in top:
                kwargs[key] = value
            else:
                raise ParameterError(f"unknown config key {key!r}")
        if base_dir is not None:
            for key in _PATH_KEYS:
                if kwargs.get(key):
                    p = Path(kwargs[key])
                    kwargs[key] = str(p if p.is_absolute() else Path(base_dir) / p)
        cfg = cls(**kwargs)
        cfg.dataset.ratios = tuple(cfg.dataset.ratios)
        return cfg

    @classmethod
    def load(cls, path) -> PipelineConfig:
        path = Path(path)
        if path.suffix == ".json":
            with open(path, encoding="utf-8") as fh:
                try:
                    data = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise ParameterError(f"{path}: invalid JSON ({exc})") from None
        else:
            with open(path, "rb") as fh:
                try:
                    data = tomllib.load(fh)
                except tomllib.TOMLDecodeError as exc:
                    raise ParameterError(f"{path}: invalid TOML ({exc})") from None
        return cls.from_dict(data, base_dir=path.parent)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        """Hash of every setting that can change an output (not ``resume`` or ``output_dir``)."""
        d = self.to_dict()
        d.pop("resume")
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, default=list).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    def stage_seed(self, stage: str) -> int:
        return derive_seed(self.seed, stage)

    def validate(self) -> None:
        if not self.corpus:
            raise ParameterError("config needs a corpus path")
        if not self.train and not (self.predictions or self.model):
            raise ParameterError("without train, either predictions or model is required")
        if self.train and not (self.style_seed or self.style_predictions):
            raise ParameterError("train needs style_seed or style_predictions")
        ThresholdConfig(self.lifestage.upper, self.lifestage.lower)
        if self.communities.k < 1:
            raise ParameterError("communities.k must be >= 1")


def _section(cls, name, values):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ParameterError(f"unknown key(s) in [{name}]: {', '.join(unknown)}")
    return cls(**values)


def derive_seed(seed: int, stage: str) -> int:
    """Independent 32-bit seed per stage, a pure function of (global seed, stage name)."""
    digest = hashlib.sha256(f"{seed}:{stage}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def _write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _require(path, what: str, stage: str):
    if not path or not Path(path).exists():
        raise StageError(stage, FileNotFoundError(f"missing {what}: {path or '(not configured)'}"))
    return Path(path)


class Pipeline:
    def __init__(self, config: PipelineConfig):
        config.validate()
        self.cfg = config
        self.out = Path(config.output_dir)
        self.timings: dict[str, float] = {}
        self.resumed: list[str] = []

    def _stage(self, name, outputs, compute, load):
        paths = [self.out / o for o in outputs]
        t0 = time.perf_counter()
        try:
            if self.cfg.resume and paths and all(p.exists() for p in paths):
                log.info("stage %s: resuming from %s", name, ", ".join(outputs))
                self.resumed.append(name)
                result = load()
            else:
                log.info("stage %s", name)
                result = compute()
        except StageError:
            raise
        except (TweetDemogError, OSError, ValueError, KeyError) as exc:
            raise StageError(name, exc) from exc
        self.timings[name] = round(time.perf_counter() - t0, 3)
        return result

    def run(self) -> dict:
        cfg = self.cfg
        self.out.mkdir(parents=True, exist_ok=True)
        corpus_path = _require(cfg.corpus, "corpus file", "ingest")
        corpus = self._stage("ingest", [], lambda: ingest(corpus_path), None)

        def filter_users():
            users = sorted(basque_users(corpus, cfg.basque.min_fraction))
            (self.out / "basque_users.txt").write_text("".join(u + "\n" for u in users), encoding="utf-8")
            return users

        def load_users():
            return (self.out / "basque_users.txt").read_text(encoding="utf-8").split()

        basque = self._stage("basque_filter", ["basque_users.txt"], filter_users, load_users)
        sub = corpus.subset(basque)

        report: dict = {
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "corpus": corpus.stats().to_json(),
            "basque_users": len(basque),
        }

        training = None
        if cfg.train:
            training = self._train(sub)
            report["training"] = training
        predictions = self._predict(sub)

        def aggregate():
            by_user = group_by_user(predictions, sub, cfg.lifestage.originals_only)
            stages, _ = classify_corpus(by_user, ThresholdConfig(cfg.lifestage.upper, cfg.lifestage.lower),
                                        cfg.lifestage.mean_probability)
            write_lifestages(stages, self.out / "lifestages.csv")
            return stages

        stages = self._stage("aggregate", ["lifestages.csv"], aggregate,
                             lambda: read_lifestages(self.out / "lifestages.csv"))
        counts = class_counts(stages)
        report["lifestage"] = {"counts": counts, "n_users": len(stages)}
        lifestage_of = {s.user_id: s.label for s in stages}
        young = sorted(u for u, lab in lifestage_of.items() if lab == "young")

        def make_graph():
            g = build_graph(sub, young, cfg.graph.basque_only)
            write_edges(g, self.out / "edges.csv")
            _write_json(g.stats(), self.out / "graph_stats.json")
            return g

        def load_graph():
            g = read_edges(self.out / "edges.csv")
            for node, attrs in g.nodes.items():
                attrs["in_sample"] = node in set(young)
            return g

        graph = self._stage("graph", ["edges.csv", "graph_stats.json"], make_graph, load_graph)
        report["graph"] = _read_json(self.out / "graph_stats.json")
        if graph.n_nodes == 0:
            raise StageError("graph", DataError("the young cohort made no retweets; nothing to analyse"))

        def rank():
            total = rank_total_retweets(graph, cfg.graph.top_k)
            distinct = rank_distinct_retweeters(graph, cfg.graph.top_k)
            total.to_csv(self.out / "ranking_total_retweets.csv")
            distinct.to_csv(self.out / "ranking_distinct_retweeters.csv")
            return total, distinct

        total, distinct = self._stage("rank", [], rank, None)
        report["rankings"] = {
            total.kind: [{"user_id": u, "value": v} for u, v in total.entries],
            distinct.kind: [{"user_id": u, "value": v} for u, v in distinct.entries],
        }

        def embed():
            w = cfg.walks
            s = cfg.sgns
            wc = WalkConfig(w.p, w.q, w.walk_length, w.walks_per_node, cfg.stage_seed("walks"))
            sc = SgnsConfig(s.dimensions, s.window, s.negatives, s.epochs, s.learning_rate,
                            cfg.stage_seed("sgns"))
            emb = node2vec(graph.undirected(), wc, sc)
            emb.save(self.out / "embeddings.txt")
            return emb

        emb = self._stage("embed", ["embeddings.txt"], embed,
                          lambda: EmbeddingMatrix.load(self.out / "embeddings.txt"))

        def communities():
            a = kmeans_communities(emb, cfg.communities.k, cfg.stage_seed("communities"),
                                   nodes=graph.nodes, n_init=cfg.communities.n_init)
            a.to_csv(self.out / "communities.csv")
            return a

        assignment = self._stage(
            "communities", ["communities.csv"], communities,
            lambda: CommunityAssignment.from_csv(self.out / "communities.csv", cfg.communities.k))
        report["communities"] = {
            "k": assignment.k,
            "shares": assignment.shares,
            "details": characterize_communities(assignment, graph, cfg.communities.top_n),
        }

        def run_layout():
            lc = cfg.layout
            conf = LayoutConfig(iterations=lc.iterations, scaling=lc.scaling, gravity=lc.gravity,
                                linlog=lc.linlog, barnes_hut=lc.barnes_hut, theta=lc.theta,
                                seed=cfg.stage_seed("layout"))
            pos = layout(graph, conf)
            pos.to_csv(self.out / "positions.csv")
            return pos

        positions = self._stage("layout", ["positions.csv"], run_layout,
                                lambda: LayoutPositions.from_csv(self.out / "positions.csv"))

        def export():
            export_gexf(graph, self.out / "graph.gexf", lifestage_of, assignment.labels, positions)
            r = cfg.render
            render_svg(positions, assignment.labels, graph, self.out / "communities.svg",
                       r.width, r.height, max_edges=r.max_edges)
            if r.figures:
                figs = self.out / "figures"
                figs.mkdir(exist_ok=True)
                plotting.plot_lifestage_counts(counts, figs / "lifestages.png")
                plotting.plot_ranking(total, figs / "ranking_total_retweets.png")
                plotting.plot_ranking(distinct, figs / "ranking_distinct_retweeters.png")
                plotting.plot_community_shares(assignment.shares, figs / "community_shares.png")
                plotting.plot_layout(positions, assignment.labels, figs / "layout.png")

        self._stage("export", [], export, None)
        report["outputs"] = sorted(str(p.relative_to(self.out)) for p in self.out.rglob("*")
                                   if p.is_file() and p.name != "report.json")
        if self.resumed:
            report["resumed_stages"] = self.resumed
        if not cfg.deterministic:
            report["timings_seconds"] = self.timings
        _write_json(report, self.out / "report.json")
        return report

    def _train(self, sub) -> dict:
        cfg = self.cfg

        def style_predictions():
            if cfg.style_predictions:
                return read_predictions(_require(cfg.style_predictions, "style predictions", "style_model"))
            seed_path = _require(cfg.style_seed, "style seed dataset", "style_model")
            seed_ds = LabeledDataset.from_jsonl(seed_path)
            model = clf.train(seed_ds, self._train_config("style_model"))
            preds = clf.predict_corpus(model, sub.tweets())
            write_predictions(preds, self.out / "style_predictions.tsv")
            return preds

        style = self._stage("style_model", ["style_predictions.tsv"], style_predictions,
                            lambda: read_predictions(self.out / "style_predictions.tsv"))

        def dataset():
            d = cfg.dataset
            ds = build_dataset(sub, group_by_user(style, sub), d.n_per_class, d.per_user,
                               cfg.stage_seed("dataset"), d.ratios)
            ds.to_jsonl(self.out / "dataset.jsonl")
            return ds

        ds = self._stage("build_dataset", ["dataset.jsonl"], dataset,
                         lambda: LabeledDataset.from_jsonl(self.out / "dataset.jsonl"))

        def train():
            model = clf.train(ds.split_view("train"), self._train_config("train"))
            model.save(self.out / "model.json")
            return model

        model = self._stage("train", ["model.json"], train, lambda: clf.LinearModel.load(self.out / "model.json"))
        self._model = model

        def evaluate():
            res = {name: clf.evaluate(model, ds.split_view(name))
                   for name in ("dev", "test") if len(ds.split_view(name))}
            _write_json(res, self.out / "evaluation.json")
            return res

        metrics = self._stage("evaluate", ["evaluation.json"], evaluate,
                              lambda: _read_json(self.out / "evaluation.json"))
        return {"split_counts": split_counts(ds), "metrics": metrics}

    def _train_config(self, stage: str) -> clf.TrainConfig:
        c = self.cfg.classifier
        return clf.TrainConfig(c.learning_rate, c.epochs, c.l2, c.min_feature_freq,
                               self.cfg.stage_seed(stage), list(c.lexicons))

    def _predict(self, sub):
        cfg = self.cfg
        if not cfg.train and cfg.predictions:
            path = _require(cfg.predictions, "predictions file", "predict")
            return self._stage("predict", [], lambda: read_predictions(path), None)

        def predict():
            model = getattr(self, "_model", None)
            if model is None:
                model = clf.LinearModel.load(_require(cfg.model, "model file", "predict"))
            preds = clf.predict_corpus(model, sub.tweets())
            write_predictions(preds, self.out / "predictions.tsv")
            return preds

        return self._stage("predict", ["predictions.tsv"], predict,
                           lambda: read_predictions(self.out / "predictions.tsv"))


def run_pipeline(config: PipelineConfig) -> dict:
    """Run every stage; returns the report that is also written to ``report.json``."""
    return Pipeline(config).run()
