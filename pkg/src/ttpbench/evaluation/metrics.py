from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class FoldPlan:
    K: int
    assignments: np.ndarray
    seed: int

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.flatnonzero(self.assignments == fold)
        train = np.flatnonzero(self.assignments != fold)
        return train, test


def stratified_kfold(labels, K: int = 5, seed: int = 0) -> FoldPlan:
    """Shuffle each class and deal its rows to folds round-robin.

    Each class's fold counts differ by at most one; the starting fold of
    every class continues where the previous class stopped so fold sizes
    stay balanced too.
    """
    labels = np.asarray(labels)
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    classes, counts = np.unique(labels, return_counts=True)
    for c, n in zip(classes, counts):
        if n < K:
            raise ValueError(f"class {c} has {n} samples, fewer than K={K}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for c in classes:
        rows = rng.permutation(np.flatnonzero(labels == c))
        assignments[rows] = (offset + np.arange(len(rows))) % K
        offset = (offset + len(rows)) % K
    return FoldPlan(K, assignments, seed)


def confusion(y_true, y_pred, n_classes: int) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred differ in length")
    for name, y in (("y_true", y_true), ("y_pred", y_pred)):
        if y.size and (y.min() < 0 or y.max() >= n_classes):
            raise ValueError(f"{name} has labels outside [0, {n_classes})")
    flat = np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes)
    return flat.reshape(n_classes, n_classes)


def _safe_div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.divide(a, b, out=np.zeros_like(a, dtype=np.float64), where=b > 0)


def macro_prf(conf) -> tuple[float, float, float]:
    """Unweighted class means of precision, recall and F1 (0/0 counts as 0)."""
    conf = np.asarray(conf, dtype=np.float64)
    if conf.ndim != 2 or conf.shape[0] != conf.shape[1]:
        raise ValueError("confusion matrix must be square")
    tp = np.diag(conf)
    precision = _safe_div(tp, conf.sum(axis=0))
    recall = _safe_div(tp, conf.sum(axis=1))
    f1 = _safe_div(2.0 * precision * recall, precision + recall)
    return float(precision.mean()), float(recall.mean()), float(f1.mean())


def binary_auc(is_pos: np.ndarray, score: np.ndarray) -> float:
    """Mann-Whitney AUC with midranks for ties."""
    n_pos = int(is_pos.sum())
    n_neg = len(is_pos) - n_pos
    ranks = rankdata(score, method="average")
    return float((ranks[is_pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def macro_auc(y_true, scores) -> float:
    """One-vs-rest AUC averaged over classes that have both positives and negatives."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    values = []
    for c in range(scores.shape[1]):
        is_pos = y_true == c
        if is_pos.all() or not is_pos.any():
            continue
        values.append(binary_auc(is_pos, scores[:, c]))
    if not values:
        raise ValueError("macro_auc: no class has both positive and negative rows")
    return float(np.mean(values))


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def percent(x: float) -> int:
    # guard against 0.285 * 100 == 28.499999...
    return round_half_up(round(x * 100.0, 9))


def format_abc(values) -> str:
    """Render min, max and mean of fractions as ``A-B(C)`` integer percentages."""
    values = list(values)
    if not values:
        raise ValueError("format_abc: empty group")
    return f"{percent(min(values))}-{percent(max(values))}({percent(sum(values) / len(values))})"


def gain_percent(no: float, yes: float) -> int:
    """``100 * (yes - no) / no`` rounded half-up."""
    if no == 0:
        raise ValueError("gain_percent: baseline is zero")
    return round_half_up(round(100.0 * (yes - no) / no, 9))
