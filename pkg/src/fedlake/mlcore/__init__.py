"""Self-contained ML kernels shared by data nodes and the coordinator.

Everything here is a pure function or an rng-parameterized pure function;
callers pass explicit numpy Generators, so kernels are safe to run from
concurrent request handlers.
"""

from .config import TrainConfig, BalanceConfig, SplitConfig
from .encoding import one_hot_encode, encoded_width, EncodingError
from .balance import (
    chi_squared_imbalance,
    smote,
    adasyn,
    oversample_to_parity,
    ChiSquaredResult,
    AdasynResult,
)
from .split import train_test_split
from .linear import (
    ParameterVector,
    loss_and_grad,
    sgd_step,
    predict_scores,
    predict_proba,
    predict_labels,
    LinearClassifier,
)
from .tree import cart_train, CartTree, CartClassifier
from .gridsearch import grid_search, GridSearchResult
from .metrics import compute_metrics, MetricsReport

__all__ = [
    "TrainConfig",
    "BalanceConfig",
    "SplitConfig",
    "one_hot_encode",
    "encoded_width",
    "EncodingError",
    "chi_squared_imbalance",
    "smote",
    "adasyn",
    "oversample_to_parity",
    "ChiSquaredResult",
    "AdasynResult",
    "train_test_split",
    "ParameterVector",
    "loss_and_grad",
    "sgd_step",
    "predict_scores",
    "predict_proba",
    "predict_labels",
    "LinearClassifier",
    "cart_train",
    "CartTree",
    "CartClassifier",
    "grid_search",
    "GridSearchResult",
    "compute_metrics",
    "MetricsReport",
]
