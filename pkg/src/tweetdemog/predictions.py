"""Per-tweet classifier output and its TSV interchange format."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

from tweetdemog.errors import DataError

#: labels counted as the "positive" class of each binary task
POSITIVE_LABELS = frozenset({"young", "informal"})
KNOWN_LABELS = frozenset({"young", "adult", "informal", "formal"})

TSV_HEADER = "tweet_id\tlabel\tscore"


@dataclass(frozen=True)
class TweetPrediction:
    tweet_id: str
    label: str
    score: float

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0) or math.isnan(self.score):
            raise DataError(f"score {self.score} for tweet {self.tweet_id!r} outside [0, 1]")
        if self.label not in KNOWN_LABELS:
            raise DataError(f"unknown label {self.label!r} for tweet {self.tweet_id!r}")

    @property
    def is_positive(self) -> bool:
        return self.label in POSITIVE_LABELS


def write_predictions(predictions, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TSV_HEADER + "\n")
        for p in predictions:
            fh.write(f"{p.tweet_id}\t{p.label}\t{p.score!r}\n")


def read_predictions(path) -> list[TweetPrediction]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or (lineno == 1 and line.startswith("tweet_id\t")):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 tab-separated fields")
            try:
                score = float(parts[2])
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad score {parts[2]!r}") from None
            try:
                out.append(TweetPrediction(parts[0], parts[1], score))
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return out


def group_by_user(predictions, corpus, originals_only: bool = False) -> dict[str, list[TweetPrediction]]:
    """Attach predictions to their authors via the corpus; unknown tweet ids are an error."""
    grouped: dict[str, list[TweetPrediction]] = defaultdict(list)
    for p in predictions:
        try:
            tw = corpus.tweet(p.tweet_id)
        except KeyError:
            raise DataError(f"prediction for unknown tweet_id {p.tweet_id!r}") from None
        if originals_only and tw.is_retweet:
            continue
        grouped[tw.user_id].append(p)
    return {u: grouped[u] for u in sorted(grouped)}
