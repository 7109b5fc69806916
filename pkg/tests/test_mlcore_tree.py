import numpy as np

from fedlake.mlcore import CartClassifier, CartTree, cart_train


def test_pure_data_gives_single_leaf():
    X = np.array([[0.0], [1.0], [2.0]])
    y = np.array([1, 1, 1])
    tree = cart_train(X, y, n_classes=2)
    assert tree.root.is_leaf
    assert np.all(tree.predict(X) == 1)


def test_xor_learned_at_depth_two():
    # Oracle: enumerate all four corners and verify each prediction.
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    tree = cart_train(X, y, n_classes=2, max_depth=2, min_leaf=1)
    for x, label in zip(X, y):
        assert tree.predict_one(x) == label


def test_max_depth_zero_is_majority_leaf():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0, 0, 0, 1])
    tree = cart_train(X, y, n_classes=2, max_depth=0)
    assert tree.root.is_leaf
    assert tree.root.label == 0
    assert tree.root.purity == 0.75


def test_min_leaf_respected():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 2))
    y = rng.integers(0, 2, size=30)
    tree = cart_train(X, y, n_classes=2, max_depth=8, min_leaf=5)

    def check(node, count_source):
        if node.is_leaf:
            assert sum(node.counts) >= 5
        else:
            check(node.left, count_source)
            check(node.right, count_source)

    check(tree.root, y)


def test_deterministic_across_calls():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(60, 4))
    y = rng.integers(0, 3, size=60)
    t1 = cart_train(X, y, n_classes=3, max_depth=5).to_dict()
    t2 = cart_train(X, y, n_classes=3, max_depth=5).to_dict()
    assert t1 == t2


def test_serialization_round_trip():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, 2, size=40)
    tree = cart_train(X, y, n_classes=2, max_depth=4)
    clone = CartTree.from_dict(tree.to_dict())
    assert np.array_equal(tree.predict(X), clone.predict(X))
    assert tree.to_dict() == clone.to_dict()


def test_predict_with_purity_reports_leaf_share():
    X = np.array([[0.0], [0.1], [5.0], [5.1], [5.2]])
    y = np.array([0, 0, 1, 1, 0])
    tree = cart_train(X, y, n_classes=2, max_depth=1, min_leaf=1)
    label, purity = tree.predict_with_purity(np.array([5.05]))
    assert label == 1
    assert purity == 2 / 3


def test_estimator_facade():
    rng = np.random.default_rng(3)
    X = np.vstack([rng.normal(-1, 0.3, (20, 2)), rng.normal(1, 0.3, (20, 2))])
    y = np.array([0] * 20 + [1] * 20)
    model = CartClassifier(max_depth=3).fit(X, y)
    assert (model.predict(X) == y).mean() == 1.0
    assert model.get_params()["max_depth"] == 3
    probs = model.predict_proba(X)
    assert np.allclose(probs.sum(axis=1), 1.0)
