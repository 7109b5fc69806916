"""CART decision tree: Gini-impurity greedy splits, axis-aligned thresholds.

Determinism matters more than speed here: split ties break on the lowest
feature index, then the lowest threshold, so identically configured nodes
grow identical trees on identical data.  Trees serialize to plain dicts,
which is how they travel for federated voting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TreeNode:
    # Leaf fields
    label: int | None = None
    counts: list[int] | None = None
    purity: float | None = None
    # Split fields
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.label is not None


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p**2).sum())


def _leaf(y: np.ndarray, n_classes: int) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes)
    label = int(counts.argmax())  # ties -> lowest class index
    return TreeNode(
        label=label,
        counts=counts.tolist(),
        purity=float(counts[label] / counts.sum()),
    )


def _best_split(X: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int):
    """Exhaustive scan over features and midpoint thresholds.

    Returns (gain, feature, threshold) or None when no split satisfies the
    min_leaf constraint.  Candidates are evaluated in (feature, threshold)
    order and strictly better gain is required to displace the incumbent,
    which encodes the tie-break rule.
    """
    n = X.shape[0]
    parent = _gini(np.bincount(y, minlength=n_classes))
    best = None
    for feature in range(X.shape[1]):
        column = X[:, feature]
        order = np.argsort(column, kind="stable")
        sorted_x = column[order]
        sorted_y = y[order]
        left_counts = np.zeros(n_classes)
        right_counts = np.bincount(y, minlength=n_classes).astype(float)
        for i in range(n - 1):
            c = sorted_y[i]
            left_counts[c] += 1
            right_counts[c] -= 1
            if sorted_x[i] == sorted_x[i + 1]:
                continue
            n_left = i + 1
            n_right = n - n_left
            if n_left < min_leaf or n_right < min_leaf:
                continue
            weighted = (n_left * _gini(left_counts) + n_right * _gini(right_counts)) / n
            gain = parent - weighted
            threshold = (sorted_x[i] + sorted_x[i + 1]) / 2.0
            if best is None or gain > best[0] + 1e-12:
                best = (gain, feature, threshold)
    # Zero-gain splits are kept: deferred-payoff targets (e.g. XOR) have no
    # immediately informative split, and both children strictly shrink, so
    # descent still terminates.
    return best


def _grow(X, y, n_classes, depth, max_depth, min_leaf) -> TreeNode:
    if depth >= max_depth or np.unique(y).size == 1 or len(y) < 2 * min_leaf:
        return _leaf(y, n_classes)
    split = _best_split(X, y, n_classes, min_leaf)
    if split is None:
        return _leaf(y, n_classes)
    _, feature, threshold = split
    mask = X[:, feature] <= threshold
    return TreeNode(
        feature=feature,
        threshold=float(threshold),
        left=_grow(X[mask], y[mask], n_classes, depth + 1, max_depth, min_leaf),
        right=_grow(X[~mask], y[~mask], n_classes, depth + 1, max_depth, min_leaf),
    )


@dataclass
class CartTree:
    root: TreeNode
    n_classes: int

    def _descend(self, x: np.ndarray) -> TreeNode:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def predict_one(self, x: np.ndarray) -> int:
        return int(self._descend(np.asarray(x, dtype=float)).label)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.array([self._descend(row).label for row in X], dtype=int)

    def predict_with_purity(self, x: np.ndarray) -> tuple[int, float]:
        leaf = self._descend(np.asarray(x, dtype=float))
        return int(leaf.label), float(leaf.purity)

    def predict_counts(self, x: np.ndarray) -> np.ndarray:
        """Leaf class counts, the tree's raw evidence for one input."""
        leaf = self._descend(np.asarray(x, dtype=float))
        return np.asarray(leaf.counts, dtype=float)

    def to_dict(self) -> dict:
        def encode(node: TreeNode) -> dict:
            if node.is_leaf:
                return {
                    "label": node.label,
                    "counts": node.counts,
                    "purity": node.purity,
                }
            return {
                "feature": node.feature,
                "threshold": node.threshold,
                "left": encode(node.left),
                "right": encode(node.right),
            }

        return {"n_classes": self.n_classes, "root": encode(self.root)}

    @classmethod
    def from_dict(cls, raw: dict) -> "CartTree":
        def decode(d: dict) -> TreeNode:
            if "label" in d:
                return TreeNode(
                    label=d["label"], counts=d["counts"], purity=d["purity"]
                )
            return TreeNode(
                feature=d["feature"],
                threshold=d["threshold"],
                left=decode(d["left"]),
                right=decode(d["right"]),
            )

        return cls(root=decode(raw["root"]), n_classes=raw["n_classes"])


def cart_train(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int = 6,
    min_leaf: int = 1,
    seed: int = 0,
) -> CartTree:
    """Grow a CART classifier.  Deterministic: the seed is accepted for API
    symmetry but tie-breaking alone fixes the result."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.shape[0] < 1:
        raise ValueError("need at least one sample")
    root = _grow(X, y, n_classes, 0, max_depth, min_leaf)
    return CartTree(root=root, n_classes=n_classes)


class CartClassifier:
    """Estimator-style facade over cart_train."""

    def __init__(self, max_depth: int = 6, min_leaf: int = 1, seed: int = 0):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.tree_: CartTree | None = None

    def get_params(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "seed": self.seed,
        }

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int | None = None):
        y = np.asarray(y, dtype=int)
        if n_classes is None:
            n_classes = int(y.max()) + 1
        self.tree_ = cart_train(
            X, y, n_classes, max_depth=self.max_depth, min_leaf=self.min_leaf,
            seed=self.seed,
        )
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.tree_ is None:
            raise RuntimeError("classifier is not fitted")
        return self.tree_.predict(X)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.tree_ is None:
            raise RuntimeError("classifier is not fitted")
        X = np.asarray(X, dtype=float)
        out = np.zeros((X.shape[0], self.tree_.n_classes))
        for i, row in enumerate(X):
            counts = self.tree_.predict_counts(row)
            out[i] = counts / counts.sum()
        return out
