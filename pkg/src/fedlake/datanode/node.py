"""The data node proper: sub-query execution and local model training.

The privacy boundary lives here.  Sub-query execution is the only
operation that returns raw rows; every training-related response carries
nothing but parameter vectors, sample counts, digests and aggregate
metrics.  Training state is cached per analytical pattern and keyed by a
preprocessing fingerprint so the coordinator can prove all nodes prepared
data the same way.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field

import numpy as np

from .. import patterns as pat
from ..catalog import CATEGORICAL, GlobalSchema, NodeMapping, to_global
from ..mlcore import (
    BalanceConfig,
    MetricsReport,
    SplitConfig,
    TrainConfig,
    cart_train,
    chi_squared_imbalance,
    compute_metrics,
    one_hot_encode,
    oversample_to_parity,
    train_test_split,
)
from ..mlcore.encoding import encoded_width
from ..mlcore.linear import ParameterVector, predict_labels, predict_proba, run_epochs
from ..queryir import COUNT_BY, SELECT_ROWS, LocalSubQuery
from .dataset import ColumnDef, IngestReport, LocalDataset, ingest_csv


class NodeError(Exception):
    pass


class BusyError(NodeError):
    """A training session for this pattern is already running."""


@dataclass
class TrainingCache:
    pattern: str
    fingerprint: str
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    train_idx: np.ndarray
    test_idx: np.ndarray
    n_synthetic: int
    n_classes: int
    width: int
    class_names: tuple[str, ...]
    cleaning_dropped: int
    balance_applied: bool
    balance_info: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "pattern": self.pattern,
            "fingerprint": self.fingerprint,
            "n_train": int(len(self.y_train)),
            "n_test": int(len(self.y_test)),
            "n_synthetic": int(self.n_synthetic),
            "n_classes": int(self.n_classes),
            "width": int(self.width),
            "cleaning_dropped": int(self.cleaning_dropped),
            "balance_applied": self.balance_applied,
            "balance_info": self.balance_info,
        }


@dataclass(frozen=True)
class ModelLogEntry:
    round: int
    pattern: str
    param_digest: str
    metrics: dict

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "pattern": self.pattern,
            "param_digest": self.param_digest,
            "metrics": self.metrics,
        }


def preprocessing_fingerprint(
    schema_version: int, pattern: str, balance: BalanceConfig, split: SplitConfig, seed: int
) -> str:
    payload = json.dumps(
        {
            "schema_version": schema_version,
            "pattern": pattern,
            "balance": balance.to_dict(),
            "split": split.to_dict(),
            "seed": seed,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _params_digest(values: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(values).tobytes()).hexdigest()[:16]


class DataNode:
    """One autonomous site: immutable dataset, serialized training."""

    def __init__(
        self,
        node_id: str,
        dataset: LocalDataset,
        schema: GlobalSchema,
        mapping: NodeMapping,
        ingest_report: IngestReport | None = None,
    ):
        self.node_id = node_id
        self.dataset = dataset
        self.schema = schema
        self.mapping = mapping
        self.ingest_report = ingest_report
        self._caches: dict[str, TrainingCache] = {}
        self._logs: dict[str, list[ModelLogEntry]] = {}
        self._last_params: dict[str, ParameterVector] = {}
        self._train_locks: dict[str, threading.Lock] = {}
        self._state_lock = threading.Lock()

    @classmethod
    def from_files(cls, data_path, config_path) -> "DataNode":
        """Build a node from a data CSV and a node config JSON holding the
        global schema snapshot plus this node's mapping."""
        from ..catalog import _load_node, _load_schema  # shared validation

        with open(config_path, encoding="utf-8") as fh:
            doc = json.load(fh)
        schema = _load_schema(doc["schema"]["version"], doc["schema"]["attributes"])
        mapping = _load_node(doc["node"], schema, "node")
        declared = [
            ColumnDef(name=mapping.columns[attr.name], kind=attr.kind)
            for attr in schema.attributes
            if attr.name in mapping.columns
        ]
        dataset, report = ingest_csv(data_path, mapping.table, declared)
        return cls(
            node_id=mapping.node_id,
            dataset=dataset,
            schema=schema,
            mapping=mapping,
            ingest_report=report,
        )

    # --- structural metadata ------------------------------------------------

    def get_metadata(self) -> dict:
        """Table structure only; never any cell value."""
        return {
            "node_id": self.node_id,
            "table": self.dataset.table,
            "columns": [
                {"name": c.name, "kind": c.kind} for c in self.dataset.columns
            ],
            "row_count": self.dataset.row_count,
        }

    # --- sub-query execution --------------------------------------------------

    def execute_subquery(self, sq: LocalSubQuery) -> dict:
        if sq.mode not in (SELECT_ROWS, COUNT_BY):
            raise NodeError(f"unknown sub-query mode: {sq.mode}")
        for column in sq.group_columns:
            self.dataset.column(column)  # raises on unknown
        if sq.filter.never_matches:
            matching: list[dict] = []
        else:
            matching = [
                row for row in self.dataset.rows if self._row_matches(row, sq.filter.terms)
            ]
        if sq.mode == SELECT_ROWS:
            return {"rows": matching}
        counts: dict[tuple, int] = {}
        for row in matching:
            key = tuple(row[c] for c in sq.group_columns)
            counts[key] = counts.get(key, 0) + 1
        return {
            "counts": [
                {"key": list(k), "count": n} for k, n in sorted(counts.items())
            ]
        }

    def _row_matches(self, row: dict, terms) -> bool:
        for term in terms:
            kind = self.dataset.column(term.column).kind
            cell = row[term.column]
            if kind == CATEGORICAL:
                if term.comparator not in ("=", "!="):
                    raise NodeError(
                        f"comparator {term.comparator} not applicable to "
                        f"categorical column {term.column}"
                    )
                ok = (cell == term.value) if term.comparator == "=" else (cell != term.value)
            else:
                if isinstance(term.value, str):
                    raise NodeError(
                        f"numeric column {term.column} compared to string "
                        f"{term.value!r}"
                    )
                ok = _compare_numeric(cell, term.comparator, term.value)
            if not ok:
                return False
        return True

    # --- training -------------------------------------------------------------

    def build_training_cache(
        self,
        pattern: str,
        balance: BalanceConfig,
        split: SplitConfig,
        seed: int,
    ) -> dict:
        """Fixed pipeline: clean -> split -> encode -> balance the training
        side only.  Synthetic samples exist purely in encoded space and are
        appended after the split, so the test matrix only ever contains real
        rows."""
        spec = pat.pattern_spec(pattern)
        if spec.kind != "prediction":
            raise NodeError(f"pattern {pattern} is not trainable")
        needed = (*spec.features, spec.target)
        missing = [a for a in needed if a not in self.mapping.covered_attributes]
        if missing:
            raise NodeError(
                f"node {self.node_id} does not map attributes required by "
                f"{pattern}: {', '.join(missing)}"
            )

        global_rows, dropped = self._clean_rows(needed)
        if len(global_rows) < 2:
            raise NodeError("fewer than 2 usable rows after cleaning")

        target_def = self.schema.attribute(spec.target)
        class_names = target_def.vocabulary
        labels = np.array(
            [class_names.index(r[spec.target]) for r in global_rows], dtype=int
        )
        present = np.unique(labels)
        if present.size < 2:
            raise NodeError(
                f"target {spec.target} has fewer than 2 classes at this node"
            )

        train_idx, test_idx = train_test_split(
            len(global_rows), split.train_fraction, seed
        )
        X = one_hot_encode(global_rows, self.schema, spec.features)
        X_train, y_train = X[train_idx], labels[train_idx]
        X_test, y_test = X[test_idx], labels[test_idx]

        n_classes = len(class_names)
        applied = False
        info: dict = {}
        if balance.method != "none":
            counts = np.bincount(y_train, minlength=n_classes)
            chi = chi_squared_imbalance(counts[counts > 0])
            minority_fraction = counts[counts > 0].min() / len(y_train)
            info = {
                "chi_statistic": chi.statistic,
                "chi_reject": chi.reject,
                "minority_fraction": float(minority_fraction),
            }
            if chi.reject and minority_fraction < balance.minority_threshold:
                rng = np.random.default_rng([seed, 1])
                syn_X, syn_y, parity = oversample_to_parity(
                    X_train,
                    y_train,
                    n_classes,
                    balance.method,
                    balance.k,
                    balance.beta,
                    rng,
                )
                if len(syn_y):
                    X_train = np.vstack([X_train, syn_X])
                    y_train = np.concatenate([y_train, syn_y])
                    applied = True
                info["generated"] = int(len(syn_y))
                info["skipped_classes"] = list(parity.skipped_classes)

        cache = TrainingCache(
            pattern=pattern,
            fingerprint=preprocessing_fingerprint(
                self.schema.version, pattern, balance, split, seed
            ),
            X_train=X_train,
            y_train=y_train,
            X_test=X_test,
            y_test=y_test,
            train_idx=train_idx,
            test_idx=test_idx,
            n_synthetic=len(y_train) - len(train_idx),
            n_classes=n_classes,
            width=encoded_width(self.schema, spec.features),
            class_names=class_names,
            cleaning_dropped=dropped,
            balance_applied=applied,
            balance_info=info,
        )
        with self._state_lock:
            self._caches[pattern] = cache
        return cache.summary()

    def _clean_rows(self, needed) -> tuple[list[dict], int]:
        """Translate mapped columns to the global vocabulary, dropping rows
        whose needed cells cannot be translated."""
        columns_needed = {self.mapping.columns[a] for a in needed}
        usable: list[dict] = []
        dropped = 0
        for row in self.dataset.rows:
            projected = {c: row[c] for c in columns_needed}
            try:
                usable.append(to_global([projected], self.mapping, self.schema)[0])
            except Exception:
                dropped += 1
        return usable, dropped

    def _cache_for(self, pattern: str, fingerprint: str | None = None) -> TrainingCache:
        cache = self._caches.get(pattern)
        if cache is None:
            raise NodeError(f"no training cache built for pattern {pattern}")
        if fingerprint is not None and cache.fingerprint != fingerprint:
            raise NodeError(
                f"fingerprint mismatch for {pattern}: cache has "
                f"{cache.fingerprint}, request expects {fingerprint}"
            )
        return cache

    def _lock_for(self, pattern: str) -> threading.Lock:
        with self._state_lock:
            return self._train_locks.setdefault(pattern, threading.Lock())

    def local_train_round(
        self,
        pattern: str,
        round_index: int,
        params_values: np.ndarray,
        config: TrainConfig,
        fingerprint: str | None = None,
    ) -> tuple[np.ndarray, int]:
        """Run local_epochs of gradient descent from the received global
        parameters over this node's training split."""
        cache = self._cache_for(pattern, fingerprint)
        lock = self._lock_for(pattern)
        if not lock.acquire(blocking=False):
            raise BusyError(f"training round already running for {pattern}")
        try:
            params = ParameterVector(
                values=np.asarray(params_values, dtype=float),
                n_classes=cache.n_classes,
                width=cache.width,
                kind=config.model_kind,
            )
            rng = np.random.default_rng([config.seed, round_index])
            updated = run_epochs(
                params,
                cache.X_train,
                cache.y_train,
                epochs=config.local_epochs,
                learning_rate=config.learning_rate,
                l2=config.l2,
                batch_size=config.batch_size,
                rng=rng,
            )
            metrics = self._evaluate_params(cache, updated)
            self._append_log(
                pattern,
                ModelLogEntry(
                    round=round_index,
                    pattern=pattern,
                    param_digest=_params_digest(updated.values),
                    metrics={"accuracy": metrics.accuracy, "f1": metrics.f1},
                ),
            )
            with self._state_lock:
                self._last_params[pattern] = updated
            return updated.values, int(len(cache.y_train))
        finally:
            lock.release()

    def local_evaluate(
        self, pattern: str, params_values: np.ndarray, model_kind: str = "logistic"
    ) -> MetricsReport:
        cache = self._cache_for(pattern)
        if len(cache.y_test) == 0:
            raise NodeError("empty test split")
        params = ParameterVector(
            values=np.asarray(params_values, dtype=float),
            n_classes=cache.n_classes,
            width=cache.width,
            kind=model_kind,
        )
        return self._evaluate_params(cache, params)

    def _evaluate_params(self, cache: TrainingCache, params: ParameterVector) -> MetricsReport:
        scores = predict_proba(params, cache.X_test)
        predicted = predict_labels(params, cache.X_test)
        return compute_metrics(
            cache.y_test, predicted, scores=scores, n_classes=cache.n_classes
        )

    def train_local_tree(
        self, pattern: str, config: TrainConfig, fingerprint: str | None = None
    ) -> tuple[dict, int, MetricsReport]:
        """Fit a CART on the cached training split; the serialized tree (a
        model, not data) is this node's contribution to federated voting."""
        cache = self._cache_for(pattern, fingerprint)
        lock = self._lock_for(pattern)
        if not lock.acquire(blocking=False):
            raise BusyError(f"training round already running for {pattern}")
        try:
            tree = cart_train(
                cache.X_train,
                cache.y_train,
                cache.n_classes,
                max_depth=config.tree_max_depth,
                min_leaf=config.tree_min_leaf,
                seed=config.seed,
            )
            predicted = tree.predict(cache.X_test)
            metrics = compute_metrics(
                cache.y_test, predicted, scores=None, n_classes=cache.n_classes
            )
            self._append_log(
                pattern,
                ModelLogEntry(
                    round=self._next_round(pattern),
                    pattern=pattern,
                    param_digest=_params_digest(
                        np.frombuffer(
                            json.dumps(tree.to_dict(), sort_keys=True).encode(),
                            dtype=np.uint8,
                        )
                    ),
                    metrics={"accuracy": metrics.accuracy, "f1": metrics.f1},
                ),
            )
            return tree.to_dict(), int(len(cache.y_train)), metrics
        finally:
            lock.release()

    # --- model log --------------------------------------------------------------

    def _next_round(self, pattern: str) -> int:
        log = self._logs.get(pattern, [])
        return log[-1].round + 1 if log else 0

    def _append_log(self, pattern: str, entry: ModelLogEntry) -> None:
        with self._state_lock:
            log = self._logs.setdefault(pattern, [])
            if log and entry.round <= log[-1].round:
                # Round indices must strictly increase; re-broadcasts of the
                # same round are recorded with the next free index.
                entry = ModelLogEntry(
                    round=log[-1].round + 1,
                    pattern=entry.pattern,
                    param_digest=entry.param_digest,
                    metrics=entry.metrics,
                )
            log.append(entry)

    def model_log(self, pattern: str) -> list[ModelLogEntry]:
        return list(self._logs.get(pattern, []))

    def last_metrics(self, pattern: str) -> MetricsReport:
        with self._state_lock:
            params = self._last_params.get(pattern)
        if params is None:
            raise NodeError(f"no trained parameters for pattern {pattern}")
        return self._evaluate_params(self._cache_for(pattern), params)


def _compare_numeric(cell, comparator: str, value) -> bool:
    if comparator == "=":
        return cell == value
    if comparator == "!=":
        return cell != value
    if comparator == "<":
        return cell < value
    if comparator == "<=":
        return cell <= value
    if comparator == ">":
        return cell > value
    if comparator == ">=":
        return cell >= value
    raise NodeError(f"unknown comparator: {comparator}")
