"""Classification and clustering agreement measures."""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

from tweetdemog.errors import DataError


def binary_metrics(y_true, y_pred, positive: str = "young") -> dict[str, float]:
    """Accuracy plus precision/recall/F1 of the ``positive`` class.

    Precision, recall and F1 are 0 when their denominators vanish.
    """
    y_true, y_pred = list(y_true), list(y_pred)
    if len(y_true) != len(y_pred):
        raise DataError("label lists differ in length")
    if not y_true:
        raise DataError("cannot evaluate an empty split")
    tp = sum(t == positive and p == positive for t, p in zip(y_true, y_pred))
    fp = sum(t != positive and p == positive for t, p in zip(y_true, y_pred))
    fn = sum(t == positive and p != positive for t, p in zip(y_true, y_pred))
    correct = sum(t == p for t, p in zip(y_true, y_pred))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {
        "accuracy": correct / len(y_true),
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }


def cohen_kappa(labels_a, labels_b) -> float:
    """Cohen's kappa, computed in exact rational arithmetic.

    When chance agreement is 1 (both annotators constant on the same label)
    kappa is defined as 1 if they agree everywhere and 0 otherwise.
    """
    labels_a, labels_b = list(labels_a), list(labels_b)
    if len(labels_a) != len(labels_b):
        raise DataError(f"length mismatch: {len(labels_a)} vs {len(labels_b)}")
    n = len(labels_a)
    if n == 0:
        raise DataError("kappa needs at least one item")
    p_o = Fraction(sum(a == b for a, b in zip(labels_a, labels_b)), n)
    ca, cb = Counter(labels_a), Counter(labels_b)
    p_e = sum(Fraction(ca[k] * cb[k], n * n) for k in ca.keys() | cb.keys())
    if p_e == 1:
        return 1.0 if p_o == 1 else 0.0
    return float((p_o - p_e) / (1 - p_e))


def _entropy(counts, n) -> float:
    return -sum(c / n * math.log(c / n) for c in counts if c)


def normalized_mutual_info(labels_true, labels_pred) -> float:
    """NMI with arithmetic-mean normalisation; 1.0 when both partitions are trivial."""
    labels_true, labels_pred = list(labels_true), list(labels_pred)
    if len(labels_true) != len(labels_pred):
        raise DataError("label lists differ in length")
    n = len(labels_true)
    if n == 0:
        raise DataError("NMI of empty partitions")
    joint = Counter(zip(labels_true, labels_pred))
    ct, cp = Counter(labels_true), Counter(labels_pred)
    h_t, h_p = _entropy(ct.values(), n), _entropy(cp.values(), n)
    if h_t == 0 and h_p == 0:
        return 1.0
    mi = sum(c / n * math.log(c * n / (ct[a] * cp[b])) for (a, b), c in joint.items())
    denom = (h_t + h_p) / 2
    return max(0.0, min(1.0, mi / denom)) if denom > 0 else 0.0
