"""Registry of the analytical query patterns the federation understands.

Six patterns exist: plain retrieval, the treatment-insight count tree, and
four prediction tasks.  Each prediction pattern fixes a target attribute
and the feature attributes its models consume, so every node encodes
training data identically and parameter vectors stay dimension-compatible.
"""

from __future__ import annotations

from dataclasses import dataclass

RETRIEVE = "retrieve"
TREE_INSIGHT = "tree_insight"
PREDICT_TREATMENT = "predict_treatment"
AE_CAUSATION = "ae_causation"
AE_RISK = "ae_risk"
AE_TYPE = "ae_type"


@dataclass(frozen=True)
class PatternSpec:
    id: str
    kind: str  # "retrieve" | "tree" | "prediction"
    description: str
    keyword: str | None = None  # PREDICT <keyword> in the query language
    target: str | None = None
    features: tuple[str, ...] = ()
    # Gradient-descent step size tuned offline per task (the multiclass
    # adverse-event objective needs a larger step to leave its plateau).
    default_learning_rate: float = 1.0


PATTERNS: dict[str, PatternSpec] = {
    p.id: p
    for p in [
        PatternSpec(
            id=RETRIEVE,
            kind="retrieve",
            description="Retrieve matching patient rows across the federation",
        ),
        PatternSpec(
            id=TREE_INSIGHT,
            kind="tree",
            description="Count tree of most likely target values per patient profile",
        ),
        PatternSpec(
            id=PREDICT_TREATMENT,
            kind="prediction",
            description="Predict the treatment plan for a patient profile",
            keyword="treatment",
            target="treatment",
            features=("sex", "age", "cancer_type", "tnm_stage"),
            default_learning_rate=2.0,
        ),
        PatternSpec(
            id=AE_CAUSATION,
            kind="prediction",
            description="Decide whether a current adverse event is treatment-induced",
            keyword="ae_caused",
            target="ae_caused_by_treatment",
            features=("treatment", "frequency", "ae_type", "days_since_start"),
            default_learning_rate=2.0,
        ),
        PatternSpec(
            id=AE_RISK,
            kind="prediction",
            description="Assess the risk of adverse events for a planned treatment",
            keyword="ae_risk",
            target="ae_occurred",
            features=("sex", "age", "cancer_type", "tnm_stage", "treatment", "frequency"),
            default_learning_rate=2.0,
        ),
        PatternSpec(
            id=AE_TYPE,
            kind="prediction",
            description="Predict the most likely adverse event types for a patient",
            keyword="ae_type",
            target="ae_type",
            features=("sex", "age", "cancer_type", "tnm_stage", "treatment", "frequency"),
            default_learning_rate=5.0,
        ),
    ]
}

PREDICTION_PATTERNS = tuple(p.id for p in PATTERNS.values() if p.kind == "prediction")

KEYWORD_TO_PATTERN = {p.keyword: p.id for p in PATTERNS.values() if p.keyword}


def pattern_spec(pattern_id: str) -> PatternSpec:
    try:
        return PATTERNS[pattern_id]
    except KeyError:
        raise KeyError(f"unknown pattern: {pattern_id}") from None


def is_trainable(pattern_id: str) -> bool:
    return pattern_spec(pattern_id).kind == "prediction"
