import numpy as np
import pytest

from fedlake.mlcore import TrainConfig, grid_search


def separable_data(seed=0, n=60):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-2, 0.5, (n // 2, 2)), rng.normal(2, 0.5, (n // 2, 2))])
    y = np.array([0] * (n // 2) + [1] * (n // 2))
    return X, y


def test_single_point_grid_returns_that_point():
    X, y = separable_data()
    result = grid_search(
        TrainConfig(local_epochs=50), [{"learning_rate": 0.5}], 3, X, y
    )
    assert result.best_index == 0
    assert result.best_config.learning_rate == 0.5


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_diverging_cell_scores_zero_and_loses():
    X, y = separable_data()
    X = X * 1e3  # large scale so the huge learning rate oscillates and overflows
    result = grid_search(
        TrainConfig(model_kind="linear_svm_hinge", local_epochs=80, l2=0.01),
        [{"learning_rate": 1e12}, {"learning_rate": 1e-4}],
        3,
        X,
        y,
    )
    assert result.table[0]["mean_score"] == 0.0
    assert result.best_index == 1


def test_table_shape_matches_grid_and_folds():
    X, y = separable_data()
    grid = [{"learning_rate": lr} for lr in (0.1, 0.3, 1.0)]
    result = grid_search(TrainConfig(local_epochs=20), grid, 4, X, y)
    assert len(result.table) == 3
    assert all(len(row["fold_scores"]) == 4 for row in result.table)


def test_tie_breaks_to_first_grid_entry():
    X, y = separable_data()
    grid = [{"learning_rate": 0.5}, {"learning_rate": 0.5}]
    result = grid_search(TrainConfig(local_epochs=50), grid, 3, X, y)
    assert result.best_index == 0


def test_small_class_degrades_to_unstratified_with_flag():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(20, 2))
    y = np.array([0] * 18 + [1] * 2)
    result = grid_search(
        TrainConfig(local_epochs=5), [{"learning_rate": 0.1}], 5, X, y
    )
    assert not result.stratified
    assert any("stratification" in f for f in result.flags)


def test_stratified_folds_balance_classes():
    from fedlake.mlcore.gridsearch import _fold_assignment

    y = np.array([0] * 40 + [1] * 20)
    folds = _fold_assignment(y, 4, seed=0, stratified=True)
    for fold in range(4):
        mask = folds == fold
        assert np.sum(y[mask] == 0) == 10
        assert np.sum(y[mask] == 1) == 5


def test_decision_tree_family_supported():
    X, y = separable_data()
    result = grid_search(
        TrainConfig(model_kind="decision_tree"),
        [{"tree_max_depth": 1}, {"tree_max_depth": 3}],
        3,
        X,
        y,
    )
    assert result.table[result.best_index]["mean_score"] > 0.9


def test_empty_grid_rejected():
    X, y = separable_data()
    with pytest.raises(ValueError, match="non-empty"):
        grid_search(TrainConfig(), [], 3, X, y)
