"""Class-imbalance detection and synthetic oversampling (SMOTE / ADASYN)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Upper-tail critical values of the chi-squared distribution at alpha=0.05,
# degrees of freedom 1..20 (standard table).
CHI2_CRITICAL_05 = (
    3.841, 5.991, 7.815, 9.488, 11.070, 12.592, 14.067, 15.507, 16.919,
    18.307, 19.675, 21.026, 22.362, 23.685, 24.996, 26.296, 27.587,
    28.869, 30.144, 31.410,
)


@dataclass(frozen=True)
class ChiSquaredResult:
    statistic: float
    dof: int
    critical: float
    reject: bool
    degenerate: bool = False


def chi_squared_imbalance(class_counts) -> ChiSquaredResult:
    """Uniformity test over observed class counts.

    statistic = sum((O_i - E)^2 / E) with E = total/classes; rejected when
    it exceeds the embedded alpha=0.05 critical value at dof = classes - 1.
    A single observed class is flagged degenerate and rejected trivially.
    """
    counts = np.asarray(list(class_counts), dtype=float)
    if counts.size == 0 or counts.sum() <= 0:
        raise ValueError("need at least one class with positive total count")
    if np.any(counts < 0):
        raise ValueError("class counts must be non-negative")
    if counts.size == 1:
        return ChiSquaredResult(
            statistic=float("inf"), dof=0, critical=0.0, reject=True, degenerate=True
        )
    dof = counts.size - 1
    if dof > len(CHI2_CRITICAL_05):
        raise ValueError(f"no embedded critical value for dof {dof} (max 20)")
    expected = counts.sum() / counts.size
    statistic = float(((counts - expected) ** 2 / expected).sum())
    critical = CHI2_CRITICAL_05[dof - 1]
    return ChiSquaredResult(
        statistic=statistic, dof=dof, critical=critical, reject=statistic > critical
    )


def _nearest_neighbors(X: np.ndarray, k: int) -> np.ndarray:
    """Brute-force k nearest Euclidean neighbors per row, self excluded.

    Ties are broken by lowest row index (stable sort), keeping the result
    deterministic.
    """
    n = X.shape[0]
    d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :k]


def smote(minority: np.ndarray, k: int, n_synthetic: int, rng) -> np.ndarray:
    """Interpolate synthetic minority samples between k-NN pairs.

    Each synthetic row is x + lam * (x_nn - x) for a uniform lam in [0, 1],
    x drawn uniformly from the minority set and x_nn uniformly from its k
    nearest minority neighbors.
    """
    minority = np.asarray(minority, dtype=float)
    m = minority.shape[0]
    if m < 2:
        raise ValueError("SMOTE needs at least 2 minority samples")
    if not 1 <= k <= m - 1:
        raise ValueError(f"k must be in [1, {m - 1}], got {k}")
    if n_synthetic == 0:
        return np.empty((0, minority.shape[1]), dtype=float)
    neighbors = _nearest_neighbors(minority, k)
    base = rng.integers(0, m, size=n_synthetic)
    picks = rng.integers(0, k, size=n_synthetic)
    lams = rng.uniform(0.0, 1.0, size=n_synthetic)
    x = minority[base]
    x_nn = minority[neighbors[base, picks]]
    return x + lams[:, None] * (x_nn - x)


@dataclass(frozen=True)
class AdasynResult:
    synthetic: np.ndarray
    allocations: np.ndarray  # g_i per minority sample
    target_total: int  # G
    uniform_fallback: bool = False


def adasyn(X: np.ndarray, y: np.ndarray, beta: float, k: int, rng) -> AdasynResult:
    """Adaptive oversampling: more synthetic mass near the class border.

    Binary minority/majority framing (callers run one-vs-rest per class for
    multiclass).  G = (m_l - m_s) * beta samples total; each minority point
    x_i receives g_i = floor(r_hat_i * G), where r_i is the fraction of
    majority points among its k nearest neighbors in the full dataset.
    Flooring keeps sum(g_i) within [G - m_s, G].  When no minority point
    has majority neighbors (all r_i = 0) allocation falls back to uniform,
    flagged on the result.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if not 0 < beta <= 1:
        raise ValueError("beta must be in (0, 1]")
    labels, counts = np.unique(y, return_counts=True)
    if labels.size != 2:
        raise ValueError("adasyn expects a binary minority/majority framing")
    minority_label = labels[np.argmin(counts)]
    minority_mask = y == minority_label
    m_s = int(minority_mask.sum())
    m_l = int((~minority_mask).sum())
    if m_s < 2:
        raise ValueError("ADASYN needs at least 2 minority samples")

    G = int(np.floor((m_l - m_s) * beta))
    minority = X[minority_mask]
    if G <= 0:
        return AdasynResult(
            synthetic=np.empty((0, X.shape[1])),
            allocations=np.zeros(m_s, dtype=int),
            target_total=max(G, 0),
        )

    k_full = min(k, X.shape[0] - 1)
    neighbors = _nearest_neighbors(X, k_full)
    majority_mask = ~minority_mask
    minority_idx = np.flatnonzero(minority_mask)
    r = majority_mask[neighbors[minority_idx]].sum(axis=1) / k_full

    fallback = bool(r.sum() == 0)
    if fallback:
        g = np.full(m_s, G // m_s, dtype=int)
    else:
        r_hat = r / r.sum()
        g = np.floor(r_hat * G).astype(int)

    k_min = min(k, m_s - 1)
    min_neighbors = _nearest_neighbors(minority, k_min)
    pieces = []
    for i in range(m_s):
        if g[i] == 0:
            continue
        picks = rng.integers(0, k_min, size=g[i])
        lams = rng.uniform(0.0, 1.0, size=g[i])
        x = minority[i]
        x_nn = minority[min_neighbors[i, picks]]
        pieces.append(x + lams[:, None] * (x_nn - x))
    synthetic = (
        np.vstack(pieces) if pieces else np.empty((0, X.shape[1]), dtype=float)
    )
    return AdasynResult(
        synthetic=synthetic, allocations=g, target_total=G, uniform_fallback=fallback
    )


@dataclass
class ParityInfo:
    method: str
    triggered: bool
    chi: ChiSquaredResult | None = None
    minority_fraction: float | None = None
    per_class: dict = field(default_factory=dict)
    skipped_classes: list = field(default_factory=list)
    uniform_fallback: bool = False


def oversample_to_parity(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    method: str,
    k: int,
    beta: float,
    rng,
) -> tuple[np.ndarray, np.ndarray, ParityInfo]:
    """Raise every under-represented class toward the majority count.

    SMOTE synthesizes exactly (majority - count) samples per class; ADASYN
    targets G = (majority - count) * beta with border-adaptive allocation.
    Classes with fewer than 2 members cannot be interpolated and are
    recorded as skipped.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    counts = np.bincount(y, minlength=n_classes)
    majority = int(counts.max())
    info = ParityInfo(method=method, triggered=True)
    syn_X: list[np.ndarray] = []
    syn_y: list[np.ndarray] = []
    for c in range(n_classes):
        count = int(counts[c])
        if count == 0 or count == majority:
            continue
        if count < 2:
            info.skipped_classes.append(c)
            continue
        if method == "smote":
            n_syn = majority - count
            k_eff = min(k, count - 1)
            rows = smote(X[y == c], k_eff, n_syn, rng)
            info.per_class[c] = {"generated": int(rows.shape[0]), "k": k_eff}
        elif method == "adasyn":
            # One-vs-rest framing: rest > majority in multiclass, so scale
            # beta to keep the target at (majority - count) * beta.
            rest_margin = (len(y) - count) - count
            parity_margin = majority - count
            beta_eff = beta * parity_margin / rest_margin if rest_margin > 0 else beta
            binary = np.where(y == c, 1, 0)
            result = adasyn(X, binary, beta=min(beta_eff, 1.0), k=k, rng=rng)
            rows = result.synthetic
            info.uniform_fallback = info.uniform_fallback or result.uniform_fallback
            info.per_class[c] = {
                "generated": int(rows.shape[0]),
                "target_total": result.target_total,
                "uniform_fallback": result.uniform_fallback,
            }
        else:
            raise ValueError(f"unknown oversampling method: {method}")
        if rows.shape[0]:
            syn_X.append(rows)
            syn_y.append(np.full(rows.shape[0], c, dtype=int))
    if syn_X:
        return np.vstack(syn_X), np.concatenate(syn_y), info
    return np.empty((0, X.shape[1])), np.empty(0, dtype=int), info
