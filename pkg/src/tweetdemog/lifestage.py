"""Per-user life-stage labels from per-tweet predictions.

A user is ``young`` when the fraction of their tweets labelled young is above
the upper threshold, ``adult`` when it is below the lower one, and
``underdetermined`` on the closed interval between them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

from tweetdemog.corpus import as_fraction
from tweetdemog.errors import DataError, ParameterError

YOUNG, ADULT, UNDERDETERMINED = "young", "adult", "underdetermined"
LABELS = (ADULT, UNDERDETERMINED, YOUNG)
CSV_FIELDS = ("user_id", "young_fraction", "n_tweets", "label")


@dataclass(frozen=True)
class ThresholdConfig:
    upper: float = 0.60
    lower: float = 0.40

    def __post_init__(self):
        lo, hi = as_fraction(self.lower), as_fraction(self.upper)
        if not 0 <= lo <= hi <= 1:
            raise ParameterError(f"need 0 <= lower <= upper <= 1, got lower={self.lower} upper={self.upper}")


@dataclass(frozen=True)
class UserLifeStage:
    user_id: str
    young_fraction: float
    label: str
    n_tweets: int


def label_for_fraction(fraction, thresholds: ThresholdConfig = ThresholdConfig()) -> str:
    f = as_fraction(fraction)
    if f > as_fraction(thresholds.upper):
        return YOUNG
    if f < as_fraction(thresholds.lower):
        return ADULT
    return UNDERDETERMINED


def classify_user(user_id, predictions, thresholds: ThresholdConfig = ThresholdConfig(),
                  mean_probability: bool = False) -> UserLifeStage:
    """Aggregate one user's tweet predictions.

    By default the young fraction is the share of tweets labelled young; with
    ``mean_probability`` it is the mean predicted young probability instead.
    """
    predictions = list(predictions)
    if not predictions:
        raise DataError(f"user {user_id!r} has no predictions")
    n = len(predictions)
    if mean_probability:
        frac = sum(Fraction(p.score) for p in predictions) / n
    else:
        frac = Fraction(sum(p.label == YOUNG for p in predictions), n)
    return UserLifeStage(user_id, float(frac), label_for_fraction(frac, thresholds), n)


def classify_corpus(predictions_by_user, thresholds: ThresholdConfig = ThresholdConfig(),
                    mean_probability: bool = False):
    """Label every user; returns ``(stages, counts)`` with counts keyed by label."""
    stages = [classify_user(uid, predictions_by_user[uid], thresholds, mean_probability)
              for uid in sorted(predictions_by_user)]
    return stages, class_counts(stages)


def class_counts(stages) -> dict[str, int]:
    counts = {label: 0 for label in LABELS}
    for s in stages:
        counts[s.label] += 1
    return counts


@dataclass
class TransitionMatrix:
    counts: dict[tuple[str, str], int]
    n_users: int
    n_changed: int

    @property
    def changed_fraction(self) -> float:
        return self.n_changed / self.n_users if self.n_users else 0.0

    def row_sums(self) -> dict[str, int]:
        return {a: sum(self.counts[a, b] for b in LABELS) for a in LABELS}

    def column_sums(self) -> dict[str, int]:
        return {b: sum(self.counts[a, b] for a in LABELS) for b in LABELS}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["old", "new", "count"])
            for a in LABELS:
                for b in LABELS:
                    w.writerow([a, b, self.counts[a, b]])


def compare_methods(labels_old, labels_new) -> TransitionMatrix:
    """Cross-tabulate two labelings of the same users (old label -> new label)."""
    old_users, new_users = set(labels_old), set(labels_new)
    if old_users != new_users:
        diff = sorted(old_users ^ new_users)
        raise DataError(f"user sets differ; symmetric difference: {diff}")
    counts = {(a, b): 0 for a in LABELS for b in LABELS}
    changed = 0
    for uid in old_users:
        a, b = labels_old[uid], labels_new[uid]
        if (a, b) not in counts:
            raise DataError(f"user {uid!r} has unknown label pair ({a!r}, {b!r})")
        counts[a, b] += 1
        changed += a != b
    return TransitionMatrix(counts, len(old_users), changed)


def write_lifestages(stages, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for s in stages:
            w.writerow([s.user_id, repr(s.young_fraction), s.n_tweets, s.label])


def read_lifestages(path) -> list[UserLifeStage]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(CSV_FIELDS) - set(reader.fieldnames):
            raise DataError(f"{path}: expected columns {','.join(CSV_FIELDS)}")
        for lineno, row in enumerate(reader, 2):
            try:
                stage = UserLifeStage(row["user_id"], float(row["young_fraction"]), row["label"],
                                      int(row["n_tweets"]))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if stage.label not in LABELS:
                raise DataError(f"{path}:{lineno}: unknown label {stage.label!r}")
            out.append(stage)
    return out
