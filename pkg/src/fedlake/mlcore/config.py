"""Training, balancing and split configuration records."""

from __future__ import annotations

from dataclasses import dataclass, asdict, fields

MODEL_KINDS = ("logistic", "linear_svm_hinge", "decision_tree")
BALANCE_METHODS = ("none", "smote", "adasyn")


@dataclass(frozen=True)
class TrainConfig:
    model_kind: str = "logistic"
    learning_rate: float = 1.0
    local_epochs: int = 1
    batch_size: int | None = None  # None = full batch
    l2: float = 0.0
    seed: int = 0
    rounds: int = 200
    smote_k: int = 5
    adasyn_beta: float = 1.0
    tree_max_depth: int = 6
    tree_min_leaf: int = 2

    def __post_init__(self) -> None:
        if self.model_kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind: {self.model_kind}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.local_epochs < 0:
            raise ValueError("local_epochs must be >= 0")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.smote_k < 1:
            raise ValueError("smote_k must be >= 1")
        if not 0 < self.adasyn_beta <= 1:
            raise ValueError("adasyn_beta must be in (0, 1]")
        if self.tree_max_depth < 0:
            raise ValueError("tree_max_depth must be >= 0")
        if self.tree_min_leaf < 1:
            raise ValueError("tree_min_leaf must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown train config keys: {', '.join(sorted(unknown))}")
        return cls(**raw)


@dataclass(frozen=True)
class BalanceConfig:
    """Gate and method for training-split oversampling.

    Oversampling fires only when the chi-squared uniformity test rejects
    at alpha=0.05 AND the minority class fraction is below
    ``minority_threshold``; the test split is never touched.
    """

    method: str = "smote"
    k: int = 5
    beta: float = 1.0
    minority_threshold: float = 0.35

    def __post_init__(self) -> None:
        if self.method not in BALANCE_METHODS:
            raise ValueError(f"unknown balance method: {self.method}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must be in (0, 1]")
        if not 0 < self.minority_threshold <= 1:
            raise ValueError("minority_threshold must be in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "BalanceConfig":
        return cls(**raw)


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.8

    def __post_init__(self) -> None:
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must be in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "SplitConfig":
        return cls(**raw)
