"""Semi-automatic construction of a young/adult training set.

Users are ranked by the share of informal tweets in their timeline, the two
ends of the ranking are taken as young and adult, a fixed number of tweets is
sampled from each selected user and the result is split by user.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from fractions import Fraction

from tweetdemog.corpus import preprocess
from tweetdemog.errors import DataError, ParameterError

SPLITS = ("train", "dev", "test")


@dataclass(frozen=True)
class UserRankEntry:
    user_id: str
    informal_fraction: float
    n_tweets: int


@dataclass(frozen=True)
class Example:
    text: str
    label: str
    user_id: str
    tweet_id: str = ""
    split: str | None = None


class LabeledDataset:
    def __init__(self, examples):
        self.examples = list(examples)

    def __len__(self):
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __eq__(self, other):
        return isinstance(other, LabeledDataset) and self.examples == other.examples

    def split_view(self, name: str) -> LabeledDataset:
        return LabeledDataset(e for e in self.examples if e.split == name)

    def label_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for e in self.examples:
            counts[e.label] = counts.get(e.label, 0) + 1
        return dict(sorted(counts.items()))

    def to_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for e in self.examples:
                fh.write(json.dumps(asdict(e), ensure_ascii=False, sort_keys=True) + "\n")

    @classmethod
    def from_jsonl(cls, path) -> LabeledDataset:
        examples = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    examples.append(Example(
                        text=rec["text"], label=rec["label"], user_id=str(rec.get("user_id", "")),
                        tweet_id=str(rec.get("tweet_id", "")), split=rec.get("split"),
                    ))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: bad dataset record ({exc})") from None
        return cls(examples)


def rank_users(predictions_by_user) -> list[UserRankEntry]:
    """Rank users by their fraction of informal tweets, highest first.

    ``predictions_by_user`` maps user_id to that user's TweetPredictions; ties
    are broken by ascending user_id.
    """
    keyed = []
    for uid, preds in predictions_by_user.items():
        preds = list(preds)
        if not preds:
            raise DataError(f"user {uid!r} has no predicted tweets")
        frac = Fraction(sum(p.is_positive for p in preds), len(preds))
        keyed.append((-frac, uid, len(preds)))
    keyed.sort()
    return [UserRankEntry(uid, float(-f), n) for f, uid, n in keyed]


def select_extremes(ranking, n_per_class: int = 500) -> tuple[set[str], set[str]]:
    """Top ``n_per_class`` users become young, bottom ``n_per_class`` adult."""
    if n_per_class < 1:
        raise ParameterError("n_per_class must be >= 1")
    need = 2 * n_per_class
    if len(ranking) < need:
        raise DataError(
            f"ranking has {len(ranking)} users but {need} are needed "
            f"(short by {need - len(ranking)})"
        )
    young = {e.user_id for e in ranking[:n_per_class]}
    adult = {e.user_id for e in ranking[-n_per_class:]}
    return young, adult


def _user_rng(seed: int, user_id: str) -> random.Random:
    return random.Random(f"{seed}:{user_id}")


def sample_tweets(corpus, users, per_user: int = 100, seed: int = 0) -> LabeledDataset:
    """Sample up to ``per_user`` tweets per labelled user without replacement.

    ``users`` maps user_id to label. Each user's draw uses its own RNG stream
    derived from ``(seed, user_id)``, so the result does not depend on the
    order users are visited in. Sampled texts are preprocessed.
    """
    if per_user < 1:
        raise ParameterError("per_user must be >= 1")
    examples = []
    for uid in sorted(users):
        if uid not in corpus:
            raise DataError(f"unknown user {uid!r}")
        tweets = corpus[uid].tweets
        k = min(per_user, len(tweets))
        picked = sorted(_user_rng(seed, uid).sample(range(len(tweets)), k))
        for i in picked:
            tw = tweets[i]
            examples.append(Example(preprocess(tw.text), users[uid], uid, tw.tweet_id))
    return LabeledDataset(examples)


def split(dataset: LabeledDataset, ratios=(0.6, 0.2, 0.2), seed: int = 0) -> LabeledDataset:
    """Tag every example train/dev/test, keeping each user's tweets together.

    Within each class users are shuffled and laid end to end by tweet count;
    a user lands in the split containing the midpoint of its span. Each
    split's tweet total is therefore off its target by at most one user.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ParameterError(f"ratios must be three non-negative numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ParameterError(f"ratios must sum to 1, got {sum(ratios)}")
    bounds = (ratios[0], ratios[0] + ratios[1])

    by_class: dict[str, dict[str, int]] = {}
    for e in dataset:
        counts = by_class.setdefault(e.label, {})
        counts[e.user_id] = counts.get(e.user_id, 0) + 1

    assignment: dict[str, str] = {}
    for label in sorted(by_class):
        counts = by_class[label]
        order = sorted(counts)
        random.Random(f"{seed}:{label}").shuffle(order)
        total = sum(counts.values())
        acc = 0
        for uid in order:
            mid = (acc + counts[uid] / 2) / total
            acc += counts[uid]
            if uid in assignment:
                raise DataError(f"user {uid!r} carries more than one label")
            assignment[uid] = SPLITS[0] if mid < bounds[0] else SPLITS[1] if mid < bounds[1] else SPLITS[2]

    return LabeledDataset(
        Example(e.text, e.label, e.user_id, e.tweet_id, assignment[e.user_id]) for e in dataset
    )


def split_counts(dataset: LabeledDataset) -> dict[str, dict[str, int]]:
    out: dict[str, dict[str, int]] = {}
    for e in dataset:
        out.setdefault(e.label, {s: 0 for s in SPLITS})[e.split] += 1
    return out


def build_dataset(corpus, predictions_by_user, n_per_class=500, per_user=100, seed=0,
                  ratios=(0.6, 0.2, 0.2)) -> LabeledDataset:
    ranking = rank_users(predictions_by_user)
    young, adult = select_extremes(ranking, n_per_class)
    labels = {u: "young" for u in young} | {u: "adult" for u in adult}
    return split(sample_tweets(corpus, labels, per_user, seed), ratios, seed)

