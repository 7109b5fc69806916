import numpy as np
import pytest

from fedlake.mlcore import EncodingError, encoded_width, one_hot_encode
from fedlake.catalog import AttributeDef, GlobalSchema

SCHEMA = GlobalSchema(
    version=1,
    attributes=(
        AttributeDef(name="color", kind="categorical", vocabulary=("red", "green", "blue")),
        AttributeDef(name="age", kind="numeric-integer", range=(0.0, 120.0)),
    ),
)


def test_single_categorical_value():
    X = one_hot_encode([{"color": "green"}], SCHEMA, ["color"])
    assert X.tolist() == [[0.0, 1.0, 0.0]]


def test_numeric_min_max_scaling():
    X = one_hot_encode([{"age": 40}], SCHEMA, ["age"])
    assert X[0, 0] == pytest.approx(40 / 120, abs=1e-12)
    assert X[0, 0] == pytest.approx(0.3333, abs=1e-4)


def test_combined_row_layout_follows_feature_order():
    X = one_hot_encode([{"color": "blue", "age": 120}], SCHEMA, ["color", "age"])
    assert X.tolist() == [[0.0, 0.0, 1.0, 1.0]]


def test_width_matches_independent_recount():
    # Oracle: recompute the expected width directly from the schema.
    features = ["color", "age"]
    expected = sum(
        len(a.vocabulary) if a.is_categorical else 1
        for a in SCHEMA.attributes
        if a.name in features
    )
    assert encoded_width(SCHEMA, features) == expected
    X = one_hot_encode([{"color": "red", "age": 1}], SCHEMA, features)
    assert X.shape[1] == expected


def test_each_categorical_block_has_exactly_one_hot():
    rows = [{"color": c, "age": i} for i, c in enumerate(["red", "green", "blue"])]
    X = one_hot_encode(rows, SCHEMA, ["color", "age"])
    assert np.all(X[:, :3].sum(axis=1) == 1.0)


def test_out_of_vocabulary_value_is_hard_error():
    with pytest.raises(EncodingError, match="not in vocabulary"):
        one_hot_encode([{"color": "magenta"}], SCHEMA, ["color"])


def test_missing_attribute_is_error():
    with pytest.raises(EncodingError, match="missing attribute"):
        one_hot_encode([{"color": "red"}], SCHEMA, ["color", "age"])


def test_numeric_without_range_is_error():
    schema = GlobalSchema(
        version=1,
        attributes=(AttributeDef(name="x", kind="numeric-real"),),
    )
    with pytest.raises(EncodingError, match="no range"):
        one_hot_encode([{"x": 1.0}], schema, ["x"])


def test_empty_row_list_gives_empty_matrix():
    X = one_hot_encode([], SCHEMA, ["color", "age"])
    assert X.shape == (0, 4)
