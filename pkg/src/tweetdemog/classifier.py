"""L2-regularised logistic regression over sparse tweet features.

Training is plain SGD with a 1/sqrt(t) learning-rate decay. The L2 shrink is
applied lazily through a global scale factor (w = scale * v) so that each step
only touches the features present in the example.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from tweetdemog.corpus import preprocess
from tweetdemog.errors import DataError, ParameterError
from tweetdemog.features import ClusterLexicon, extract_features
from tweetdemog.metrics import binary_metrics
from tweetdemog.predictions import TweetPrediction

FORMAT_VERSION = 1

LABEL_PAIRS = {
    frozenset({"young", "adult"}): ("adult", "young"),
    frozenset({"informal", "formal"}): ("formal", "informal"),
}


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 10
    l2: float = 1e-5
    min_feature_freq: int = 2
    seed: int = 42
    lexicon_paths: list[str] = field(default_factory=list)

    def validate(self):
        if self.epochs < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be positive")
        if self.l2 < 0 or self.learning_rate * self.l2 >= 1:
            raise ParameterError("l2 must satisfy 0 <= l2 < 1/learning_rate")
        if self.min_feature_freq < 1:
            raise ParameterError("min_feature_freq must be >= 1")


@dataclass
class LinearModel:
    vocabulary: dict[str, int]
    weights: np.ndarray
    bias: float
    config: TrainConfig
    labels: tuple[str, str] = ("adult", "young")  # (negative, positive)
    lexicons: list[ClusterLexicon] = field(default_factory=list, repr=False)

    @property
    def positive(self) -> str:
        return self.labels[1]

    def vectorize(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        feats = extract_features(text, self.lexicons)
        pairs = sorted((self.vocabulary[k], v) for k, v in feats.items() if k in self.vocabulary)
        idx = np.fromiter((i for i, _ in pairs), dtype=np.int64, count=len(pairs))
        val = np.fromiter((v for _, v in pairs), dtype=np.float64, count=len(pairs))
        return idx, val

    def decision(self, text: str) -> float:
        idx, val = self.vectorize(text)
        return float(self.weights[idx] @ val) + self.bias

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "config": asdict(self.config),
            "labels": list(self.labels),
            "vocabulary": self.vocabulary,
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path, lexicons=None) -> LinearModel:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            if data.get("format_version") != FORMAT_VERSION:
                raise DataError(f"unsupported model format_version {data.get('format_version')!r}")
            config = TrainConfig(**data["config"])
            weights = np.asarray(data["weights"], dtype=np.float64)
            vocab = {k: int(v) for k, v in data["vocabulary"].items()}
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"{path}: malformed model file ({exc})") from None
        if len(weights) != len(vocab) or not np.all(np.isfinite(weights)):
            raise DataError(f"{path}: weights do not match vocabulary")
        if lexicons is None:
            lexicons = [ClusterLexicon.load(p) for p in config.lexicon_paths]
        return cls(vocab, weights, float(data["bias"]), config, tuple(data["labels"]), list(lexicons))


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def log_loss(z: float, y: float) -> float:
    """Logistic loss of margin ``z`` for target ``y`` in {0, 1}, overflow-safe."""
    softplus = max(z, 0.0) + math.log1p(math.exp(-abs(z)))
    return softplus - y * z


def loss_residual(z: float, y: float) -> float:
    """d log_loss / dz."""
    return sigmoid(z) - y


def objective_and_gradient(weights, bias, idx, val, y, l2):
    """Per-example regularised objective and its exact gradient.

    Returns ``(loss, grad_weights, grad_bias)`` where
    ``loss = log_loss(w.x + b, y) + l2/2 * |w|^2``. The bias is not penalised.
    """
    weights = np.asarray(weights, dtype=np.float64)
    z = float(weights[idx] @ val) + bias
    r = loss_residual(z, y)
    grad = l2 * weights
    np.add.at(grad, idx, r * np.asarray(val))
    return log_loss(z, y) + 0.5 * l2 * float(weights @ weights), grad, r


def _resolve_labels(examples) -> tuple[str, str]:
    present = frozenset(e.label for e in examples)
    if len(present) < 2:
        raise DataError(f"training data must contain two classes, found {sorted(present)}")
    pair = LABEL_PAIRS.get(present)
    if pair is None:
        raise DataError(f"unsupported label set {sorted(present)}")
    return pair


def train(dataset, config: TrainConfig | None = None, lexicons=None) -> LinearModel:
    """Fit a :class:`LinearModel` on every example of ``dataset``.

    Pass ``dataset.split_view("train")`` to restrict to the training split.
    Identical inputs give bit-identical models.
    """
    config = config or TrainConfig()
    config.validate()
    if lexicons is None:
        lexicons = [ClusterLexicon.load(p) for p in config.lexicon_paths]
    examples = list(dataset)
    negative, positive = _resolve_labels(examples)

    feats = [extract_features(e.text, lexicons) for e in examples]
    df = Counter(k for f in feats for k in f)
    vocab_list = sorted(k for k, c in df.items() if c >= config.min_feature_freq)
    vocab = {k: i for i, k in enumerate(vocab_list)}

    rows = []
    for f in feats:
        pairs = sorted((vocab[k], v) for k, v in f.items() if k in vocab)
        rows.append((np.array([i for i, _ in pairs], dtype=np.int64),
                     np.array([v for _, v in pairs], dtype=np.float64)))
    ys = [1.0 if e.label == positive else 0.0 for e in examples]

    v = np.zeros(len(vocab))
    scale, bias, t = 1.0, 0.0, 0
    rng = random.Random(config.seed)
    order = list(range(len(examples)))
    for _ in range(config.epochs):
        rng.shuffle(order)
        for i in order:
            t += 1
            eta = config.learning_rate / math.sqrt(t)
            idx, val = rows[i]
            z = scale * float(v[idx] @ val) + bias
            r = loss_residual(z, ys[i])
            # w <- (1 - eta*l2) w - eta*r*x, with w = scale*v
            scale *= 1.0 - eta * config.l2
            v[idx] -= (eta * r / scale) * val
            bias -= eta * r
            if scale < 1e-9:
                v *= scale
                scale = 1.0
    weights = v * scale
    if not np.all(np.isfinite(weights)):
        raise DataError("training diverged (non-finite weights)")
    return LinearModel(vocab, weights, bias, config, (negative, positive), list(lexicons))


def predict(model: LinearModel, text: str, tweet_id: str = "") -> TweetPrediction:
    """Score one tweet; the positive label is assigned iff score >= 0.5."""
    score = sigmoid(model.decision(preprocess(text)))
    # keep the score strictly inside (0, 1) even when the margin saturates
    score = min(max(score, 5e-324), 1.0 - 2.0 ** -53)
    label = model.labels[1] if score >= 0.5 else model.labels[0]
    return TweetPrediction(tweet_id, label, score)


def predict_corpus(model: LinearModel, tweets) -> list[TweetPrediction]:
    return [predict(model, tw.text, tw.tweet_id) for tw in tweets]


def evaluate(model: LinearModel, dataset) -> dict[str, float]:
    """Accuracy, precision, recall and F1 of the model's positive class."""
    examples = list(dataset)
    if not examples:
        raise DataError("cannot evaluate an empty split")
    preds = [predict(model, e.text).label for e in examples]
    return binary_metrics([e.label for e in examples], preds, positive=model.positive)
