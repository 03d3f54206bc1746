"""ROC curves, AUC and F1 for anomaly scores (label 1 = anomaly)."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # score at which each point (after the first) is reached
    auc: float

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fpr", "tpr"])
            for f, t in self.points():
                w.writerow([repr(f), repr(t)])


def _check_binary(scores, labels):
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if s.shape != y.shape:
        raise ValueError(f"{s.size} scores but {y.size} labels")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    y = y.astype(int)
    if y.sum() == 0 or y.sum() == y.size:
        raise ValueError("ROC needs at least one positive and one negative label")
    return s, y


def roc_auc(scores, labels) -> RocCurve:
    """Sweep every distinct score as a threshold (flag ``score >= t``).

    Tied scores move the curve diagonally, so the trapezoidal area equals
    the Mann-Whitney statistic with half credit for ties.
    """
    s, y = _check_binary(scores, labels)
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    distinct = np.r_[np.nonzero(np.diff(s))[0], s.size - 1]
    tp = np.r_[0, np.cumsum(y)[distinct]]
    fp = np.r_[0, np.cumsum(1 - y)[distinct]]
    n_pos, n_neg = int(tp[-1]), int(fp[-1])
    # exact integer trapezoid, a single division at the end
    twice_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    auc = twice_area / (2 * n_pos * n_neg)
    return RocCurve(fp / n_neg, tp / n_pos, s[distinct], auc)


def auc_mann_whitney(scores, labels) -> float:
    """Pairwise ``P(score_pos > score_neg) + P(tie)/2`` by direct comparison."""
    s, y = _check_binary(scores, labels)
    pos, neg = s[y == 1], s[y == 0]
    diff = pos[:, None] - neg[None, :]
    wins = np.count_nonzero(diff > 0)
    ties = np.count_nonzero(diff == 0)
    return (2 * wins + ties) / (2 * pos.size * neg.size)


def f1_score(decisions, labels) -> float:
    d = np.asarray(decisions).reshape(-1).astype(int)
    y = np.asarray(labels).reshape(-1).astype(int)
    if d.shape != y.shape:
        raise ValueError(f"{d.size} decisions but {y.size} labels")
    if not np.any(y == 1):
        raise ValueError("F1 needs at least one positive label")
    tp = int(np.sum((d == 1) & (y == 1)))
    fp = int(np.sum((d == 1) & (y == 0)))
    fn = int(np.sum((d == 0) & (y == 1)))
    if tp + fp == 0 or tp == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)
