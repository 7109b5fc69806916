"""Evaluation metric suite: accuracy, precision, recall, F1, AUC-ROC.

Binary problems report positive-class precision/recall/F1 (class index 1);
multiclass problems report macro averages, with F1 defined as the harmonic
mean of the reported macro precision and recall.  Per-class values and the
full confusion matrix are always included so every headline number can be
recomputed from the report itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np


@dataclass
class ClassMetrics:
    label: int
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc_roc: float
    per_class: list[ClassMetrics]
    confusion: list[list[int]]
    n_test: int
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "MetricsReport":
        per_class = [ClassMetrics(**c) for c in raw.get("per_class", [])]
        return cls(
            accuracy=raw["accuracy"],
            precision=raw["precision"],
            recall=raw["recall"],
            f1=raw["f1"],
            auc_roc=raw["auc_roc"],
            per_class=per_class,
            confusion=raw["confusion"],
            n_test=raw["n_test"],
            flags=list(raw.get("flags", [])),
        )


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties assigned the mean of their rank block."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc_binary(y_true: np.ndarray, scores: np.ndarray) -> float:
    """Rank-statistic AUC (normalized Mann-Whitney U); ties count 0.5."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=float)
    n_pos = int((y_true == 1).sum())
    n_neg = int((y_true == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: need both positives and negatives")
    ranks = _midranks(scores)
    r_pos = ranks[y_true == 1].sum()
    u = r_pos - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def compute_metrics(
    y_true: np.ndarray,
    y_pred: np.ndarray,
    scores: np.ndarray | None = None,
    n_classes: int | None = None,
) -> MetricsReport:
    """Score predictions against ground truth.

    ``scores`` is the (n, n_classes) score/probability matrix used for
    AUC-ROC; when omitted, AUC falls back to 0.5 with a flag.  Classes with
    an empty precision or recall denominator contribute 0 and are flagged.
    """
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred lengths differ")
    n = len(y_true)
    if n < 1:
        raise ValueError("need at least one sample")
    if n_classes is None:
        n_classes = int(max(y_true.max(), y_pred.max())) + 1

    confusion = np.zeros((n_classes, n_classes), dtype=int)
    for t, p in zip(y_true, y_pred):
        confusion[t, p] += 1

    accuracy = float(np.trace(confusion) / n)
    flags: list[str] = []
    per_class: list[ClassMetrics] = []
    for c in range(n_classes):
        tp = confusion[c, c]
        fp = confusion[:, c].sum() - tp
        fn = confusion[c, :].sum() - tp
        if tp + fp == 0:
            precision_c = 0.0
            flags.append(f"class {c}: no predicted samples (precision forced 0)")
        else:
            precision_c = float(tp / (tp + fp))
        if tp + fn == 0:
            recall_c = 0.0
            flags.append(f"class {c}: no true samples (recall forced 0)")
        else:
            recall_c = float(tp / (tp + fn))
        f1_c = (
            2 * precision_c * recall_c / (precision_c + recall_c)
            if precision_c + recall_c > 0
            else 0.0
        )
        per_class.append(
            ClassMetrics(
                label=c,
                precision=precision_c,
                recall=recall_c,
                f1=f1_c,
                support=int(confusion[c, :].sum()),
            )
        )

    if n_classes == 2:
        precision = per_class[1].precision
        recall = per_class[1].recall
    else:
        precision = float(np.mean([m.precision for m in per_class]))
        recall = float(np.mean([m.recall for m in per_class]))
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0

    auc = _auc_from_scores(y_true, scores, n_classes, flags)
    return MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        auc_roc=auc,
        per_class=per_class,
        confusion=confusion.tolist(),
        n_test=n,
        flags=flags,
    )


def _auc_from_scores(y_true, scores, n_classes, flags) -> float:
    if scores is None:
        flags.append("no scores provided (AUC forced 0.5)")
        return 0.5
    scores = np.asarray(scores, dtype=float)
    if scores.ndim == 1:
        scores = np.column_stack([-scores, scores])
    if n_classes == 2:
        try:
            return auc_binary((y_true == 1).astype(int), scores[:, 1])
        except ValueError:
            flags.append("AUC degenerate: single class in y_true (forced 0.5)")
            return 0.5
    aucs = []
    for c in range(n_classes):
        marked = (y_true == c).astype(int)
        if marked.sum() == 0 or marked.sum() == len(marked):
            flags.append(f"class {c}: AUC undefined (skipped in macro average)")
            continue
        aucs.append(auc_binary(marked, scores[:, c]))
    if not aucs:
        flags.append("AUC degenerate for every class (forced 0.5)")
        return 0.5
    return float(np.mean(aucs))
