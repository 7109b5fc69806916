import numpy as np
import pytest

from fedlake.mlcore import (
    LinearClassifier,
    ParameterVector,
    loss_and_grad,
    predict_proba,
    sgd_step,
)


def finite_difference_grad(params, X, y, l2, step=1e-6):
    """Central-difference gradient oracle, independent of the analytic path."""
    base = params.values.copy()
    grad = np.zeros_like(base)
    for i in range(len(base)):
        plus = base.copy()
        plus[i] += step
        minus = base.copy()
        minus[i] -= step
        lp, _ = loss_and_grad(params.replace_values(plus), X, y, l2=l2)
        lm, _ = loss_and_grad(params.replace_values(minus), X, y, l2=l2)
        grad[i] = (lp - lm) / (2 * step)
    return grad


def random_problem(rng, kind):
    n_classes = int(rng.integers(2, 5))
    width = int(rng.integers(2, 6))
    n = int(rng.integers(3, 12))
    params = ParameterVector(
        values=rng.normal(scale=0.5, size=n_classes * (width + 1)),
        n_classes=n_classes,
        width=width,
        kind=kind,
    )
    X = rng.normal(size=(n, width))
    y = rng.integers(0, n_classes, size=n)
    return params, X, y


@pytest.mark.parametrize("kind", ["logistic", "linear_svm_hinge"])
def test_gradient_matches_finite_differences_50_draws(kind):
    rng = np.random.default_rng(42)
    for draw in range(50):
        params, X, y = random_problem(rng, kind)
        l2 = float(rng.choice([0.0, 0.01, 0.1]))
        _, analytic = loss_and_grad(params, X, y, l2=l2)
        numeric = finite_difference_grad(params, X, y, l2)
        scale = np.maximum(np.abs(numeric), 1.0)
        assert np.all(np.abs(analytic - numeric) / scale < 1e-5), f"draw {draw}"


def test_hand_computed_logistic_gradient_two_features():
    # Single sample x=(1, 2), y=0, zero params: probs are uniform (0.5, 0.5),
    # so dL/dz = (0.5 - 1, 0.5) and the weight gradient is the outer product.
    params = ParameterVector.zeros(2, 2, "logistic")
    X = np.array([[1.0, 2.0]])
    y = np.array([0])
    _, grad = loss_and_grad(params, X, y)
    expected = np.array([-0.5, -1.0, 0.5, 1.0, -0.5, 0.5])
    assert np.allclose(grad, expected, atol=1e-12)


def test_sgd_step_is_exact_gradient_step():
    rng = np.random.default_rng(0)
    params, X, y = random_problem(rng, "logistic")
    eta = 0.3
    _, grad = loss_and_grad(params, X, y, l2=0.05)
    stepped = sgd_step(params, X, y, learning_rate=eta, l2=0.05)
    assert np.allclose(stepped.values, params.values - eta * grad, atol=0)


def test_zero_gradient_point_leaves_params_unchanged():
    # Perfectly symmetric data at the softmax saddle: gradient is zero.
    params = ParameterVector.zeros(2, 1, "logistic")
    X = np.array([[1.0], [1.0]])
    y = np.array([0, 1])
    stepped = sgd_step(params, X, y, learning_rate=1.0)
    assert np.allclose(stepped.values, params.values)


def test_large_l2_shrinks_weights_toward_zero():
    params = ParameterVector(
        values=np.array([2.0, -2.0, 0.0, 0.0]), n_classes=2, width=1, kind="logistic"
    )
    X = np.array([[0.0]])  # zero feature: data gradient touches only biases
    y = np.array([0])
    stepped = sgd_step(params, X, y, learning_rate=0.1, l2=1.0)
    assert abs(stepped.values[0]) < abs(params.values[0])
    assert abs(stepped.values[1]) < abs(params.values[1])


def test_probabilities_normalize():
    rng = np.random.default_rng(3)
    params, X, _ = random_problem(rng, "logistic")
    probs = predict_proba(params, X)
    assert np.all(np.abs(probs.sum(axis=1) - 1.0) <= 1e-12)
    assert np.all(probs >= 0)


def test_parameter_vector_length_checked():
    with pytest.raises(ValueError, match="length"):
        ParameterVector(values=np.zeros(5), n_classes=2, width=2, kind="logistic")


def test_parameter_vector_rejects_non_finite():
    with pytest.raises(ValueError, match="non-finite"):
        ParameterVector(
            values=np.array([np.nan, 0.0, 0.0, 0.0]), n_classes=2, width=1,
            kind="logistic",
        )


def test_classifier_learns_separable_data():
    rng = np.random.default_rng(5)
    X = np.vstack([rng.normal(-2, 0.5, (50, 2)), rng.normal(2, 0.5, (50, 2))])
    y = np.array([0] * 50 + [1] * 50)
    for kind in ("logistic", "linear_svm_hinge"):
        model = LinearClassifier(kind=kind, learning_rate=0.5, epochs=200)
        accuracy = (model.fit(X, y).predict(X) == y).mean()
        assert accuracy == 1.0, kind


def test_fit_is_deterministic():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, 3, size=40)
    a = LinearClassifier(epochs=20, batch_size=8, seed=9).fit(X, y).params_.values
    b = LinearClassifier(epochs=20, batch_size=8, seed=9).fit(X, y).params_.values
    assert np.array_equal(a, b)
