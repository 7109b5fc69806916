"""Exhaustive grid search with stratified k-fold cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .config import TrainConfig
from .linear import LinearClassifier
from .tree import CartClassifier


@dataclass
class GridSearchResult:
    best_config: TrainConfig
    best_index: int
    table: list[dict]  # one row per grid point: params, fold_scores, mean_score
    stratified: bool
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "best_index": self.best_index,
            "best_params": self.table[self.best_index]["params"],
            "stratified": self.stratified,
            "flags": list(self.flags),
            "table": self.table,
        }


def _fold_assignment(y: np.ndarray, k_folds: int, seed: int, stratified: bool) -> np.ndarray:
    """Fold index per sample; stratified mode deals each class round-robin."""
    rng = np.random.default_rng(seed)
    folds = np.empty(len(y), dtype=int)
    if stratified:
        for c in np.unique(y):
            idx = np.flatnonzero(y == c)
            rng.shuffle(idx)
            folds[idx] = np.arange(len(idx)) % k_folds
    else:
        perm = rng.permutation(len(y))
        folds[perm] = np.arange(len(y)) % k_folds
    return folds


def _fit_and_score(config: TrainConfig, X_tr, y_tr, X_va, y_va, n_classes) -> float:
    try:
        if config.model_kind == "decision_tree":
            model = CartClassifier(
                max_depth=config.tree_max_depth,
                min_leaf=config.tree_min_leaf,
                seed=config.seed,
            )
        else:
            model = LinearClassifier(
                kind=config.model_kind,
                learning_rate=config.learning_rate,
                epochs=config.local_epochs,
                l2=config.l2,
                batch_size=config.batch_size,
                seed=config.seed,
            )
        model.fit(X_tr, y_tr, n_classes=n_classes)
        predictions = model.predict(X_va)
    except (FloatingPointError, ValueError):
        return 0.0  # diverged: non-finite loss/gradient/params score zero
    return float((predictions == y_va).mean())


def grid_search(
    base_config: TrainConfig,
    grid: list[dict],
    k_folds: int,
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int | None = None,
    seed: int = 0,
) -> GridSearchResult:
    """Score every grid point by mean validation accuracy over k folds.

    Ties go to the earlier grid entry.  When some class has fewer members
    than k_folds, stratification is impossible and the search degrades to
    unstratified folds, flagged on the result.
    """
    if k_folds < 2:
        raise ValueError("k_folds must be >= 2")
    if not grid:
        raise ValueError("grid must be non-empty")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if n_classes is None:
        n_classes = int(y.max()) + 1

    class_counts = np.bincount(y, minlength=n_classes)
    stratified = bool(np.all(class_counts[class_counts > 0] >= k_folds))
    flags = []
    if not stratified:
        flags.append("stratification impossible: some class has fewer members than folds")
    folds = _fold_assignment(y, k_folds, seed, stratified)

    table = []
    for params in grid:
        config = replace(base_config, **params)
        fold_scores = []
        for fold in range(k_folds):
            mask = folds == fold
            fold_scores.append(
                _fit_and_score(config, X[~mask], y[~mask], X[mask], y[mask], n_classes)
            )
        table.append(
            {
                "params": dict(params),
                "fold_scores": fold_scores,
                "mean_score": float(np.mean(fold_scores)),
            }
        )

    best_index = max(range(len(table)), key=lambda i: (table[i]["mean_score"], -i))
    best_config = replace(base_config, **grid[best_index])
    return GridSearchResult(
        best_config=best_config,
        best_index=best_index,
        table=table,
        stratified=stratified,
        flags=flags,
    )
