"""Flat-parameter linear classifiers trained by gradient descent.

Two losses: multinomial logistic cross-entropy and one-vs-rest squared
hinge.  Both are linear in the parameters, which is what makes per-round
parameter averaging across nodes coherent; the kernel-free "SVM" here is
exactly the hinge loss.

Parameter layout is a single flat vector: the (n_classes, width) weight
matrix in row-major order followed by n_classes biases.  Every node must
agree on this layout for averaging to be meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOGISTIC = "logistic"
HINGE = "linear_svm_hinge"
LINEAR_KINDS = (LOGISTIC, HINGE)


@dataclass(frozen=True)
class ParameterVector:
    values: np.ndarray
    n_classes: int
    width: int
    kind: str

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        expected = self.n_classes * (self.width + 1)
        if values.shape != (expected,):
            raise ValueError(
                f"parameter vector must have length {expected} "
                f"(= {self.n_classes} x ({self.width} + 1)), got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("parameter vector contains non-finite values")
        if self.kind not in LINEAR_KINDS:
            raise ValueError(f"unknown linear model kind: {self.kind}")

    @classmethod
    def zeros(cls, n_classes: int, width: int, kind: str) -> "ParameterVector":
        return cls(
            values=np.zeros(n_classes * (width + 1)),
            n_classes=n_classes,
            width=width,
            kind=kind,
        )

    @property
    def weights(self) -> np.ndarray:
        return self.values[: self.n_classes * self.width].reshape(
            self.n_classes, self.width
        )

    @property
    def bias(self) -> np.ndarray:
        return self.values[self.n_classes * self.width :]

    def replace_values(self, values: np.ndarray) -> "ParameterVector":
        return ParameterVector(
            values=values, n_classes=self.n_classes, width=self.width, kind=self.kind
        )


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def predict_scores(params: ParameterVector, X: np.ndarray) -> np.ndarray:
    return X @ params.weights.T + params.bias


def predict_proba(params: ParameterVector, X: np.ndarray) -> np.ndarray:
    """Class probabilities: softmax over scores.

    Exact class posteriors for the logistic model; for the hinge model this
    is a softmax normalization of margins (scores are not calibrated).
    """
    return _softmax(predict_scores(params, X))


def predict_labels(params: ParameterVector, X: np.ndarray) -> np.ndarray:
    return predict_scores(params, X).argmax(axis=1)


def loss_and_grad(
    params: ParameterVector, X: np.ndarray, y: np.ndarray, l2: float = 0.0
) -> tuple[float, np.ndarray]:
    """Mean batch loss and its flat gradient.

    Loss is cross-entropy (logistic) or summed per-class squared hinge with
    +/-1 one-vs-rest targets, plus (l2/2)*||W||^2; the bias is never
    regularized.
    """
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    W = params.weights
    scores = predict_scores(params, X)

    if params.kind == LOGISTIC:
        probs = _softmax(scores)
        eps = np.finfo(float).tiny
        loss = float(-np.log(probs[np.arange(n), y] + eps).mean())
        delta = probs
        delta[np.arange(n), y] -= 1.0
        delta /= n
    else:
        targets = -np.ones((n, params.n_classes))
        targets[np.arange(n), y] = 1.0
        margin = 1.0 - targets * scores
        active = np.maximum(margin, 0.0)
        loss = float((active**2).sum(axis=1).mean())
        delta = (-2.0 * active * targets) / n

    grad_W = delta.T @ X
    grad_b = delta.sum(axis=0)
    if l2 > 0:
        loss += 0.5 * l2 * float((W**2).sum())
        grad_W = grad_W + l2 * W
    grad = np.concatenate([grad_W.ravel(), grad_b])
    return loss, grad


def sgd_step(
    params: ParameterVector,
    X: np.ndarray,
    y: np.ndarray,
    learning_rate: float,
    l2: float = 0.0,
) -> ParameterVector:
    """One gradient-descent step on the given batch."""
    _, grad = loss_and_grad(params, X, y, l2=l2)
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite gradient")
    return params.replace_values(params.values - learning_rate * grad)


def run_epochs(
    params: ParameterVector,
    X: np.ndarray,
    y: np.ndarray,
    epochs: int,
    learning_rate: float,
    l2: float = 0.0,
    batch_size: int | None = None,
    rng=None,
) -> ParameterVector:
    """Run full-batch or shuffled minibatch gradient descent epochs."""
    if epochs == 0:
        return params
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty training set")
    for _ in range(epochs):
        if batch_size is None or batch_size >= n:
            params = sgd_step(params, X, y, learning_rate, l2=l2)
        else:
            order = rng.permutation(n) if rng is not None else np.arange(n)
            for start in range(0, n, batch_size):
                idx = order[start : start + batch_size]
                params = sgd_step(params, X[idx], y[idx], learning_rate, l2=l2)
    return params


class LinearClassifier:
    """Estimator-style facade over the flat-parameter kernels."""

    def __init__(
        self,
        kind: str = LOGISTIC,
        learning_rate: float = 1.0,
        epochs: int = 200,
        l2: float = 0.0,
        batch_size: int | None = None,
        seed: int = 0,
    ):
        self.kind = kind
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.batch_size = batch_size
        self.seed = seed
        self.params_: ParameterVector | None = None

    def get_params(self) -> dict:
        return {
            "kind": self.kind,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "l2": self.l2,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int | None = None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        if n_classes is None:
            n_classes = int(y.max()) + 1
        params = ParameterVector.zeros(n_classes, X.shape[1], self.kind)
        rng = np.random.default_rng(self.seed)
        self.params_ = run_epochs(
            params,
            X,
            y,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            l2=self.l2,
            batch_size=self.batch_size,
            rng=rng,
        )
        return self

    def _check_fitted(self) -> ParameterVector:
        if self.params_ is None:
            raise RuntimeError("classifier is not fitted")
        return self.params_

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict_labels(self._check_fitted(), np.asarray(X, dtype=float))

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return predict_proba(self._check_fitted(), np.asarray(X, dtype=float))

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return predict_scores(self._check_fitted(), np.asarray(X, dtype=float))
