import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrtree.core_types import DataSet, RngSpec, WeightBank
from corrtree.firesets import FireSets, fire_sets_bruteforce
from corrtree.network import (
    ModelState,
    gradient,
    loss,
    loss_from_predictions,
    predict,
    select_b,
    sigma_b,
    teacher_dataset,
)


@pytest.mark.parametrize("m", [1024, 4096, 13, 2, 10**6])
def test_select_b_matches_high_precision(m):
    want = mpmath.sqrt(mpmath.mpf("0.4") * mpmath.log(m))
    assert select_b(m) == pytest.approx(float(want), abs=1e-14)


def test_select_b_frozen_values():
    # from 50-digit mpmath evaluation of sqrt(0.4 ln m)
    assert select_b(1024) == pytest.approx(1.665109, abs=5e-7)
    assert select_b(4096) == pytest.approx(1.824036, abs=5e-7)
    assert select_b(13) == pytest.approx(1.012907, abs=5e-7)


def test_select_b_exponent_identity():
    for m in (16, 1000, 2**14):
        assert math.exp(-select_b(m) ** 2 / 2) == pytest.approx(m**-0.2, rel=1e-12)


def test_select_b_rejects_small_m():
    with pytest.raises(ValueError):
        select_b(1)


def test_sigma_b():
    assert sigma_b(2.0, 1.5) == 0.5
    assert sigma_b(1.0, 1.5) == 0.0
    assert sigma_b(1.5, 1.5) == 0.0


def test_model_rejects_negative_b():
    with pytest.raises(ValueError):
        ModelState(WeightBank([[1.0]]), -0.1)


def test_predict_single_neuron():
    model = ModelState(WeightBank([[1.0, 0.0]], [1.0]), 1.0)
    assert predict(model, DataSet([[2.0, 0.0]], [0.0])).tolist() == [1.0]


def test_predict_dead_input():
    model = ModelState(WeightBank([[1.0, 0.0], [0.0, 1.0]], [1.0, -1.0]), 2.0)
    assert predict(model, DataSet([[1.0, 1.0]], [0.0])).tolist() == [0.0]


def test_predict_symmetric_cancellation():
    w = np.array([0.3, 0.9])
    model = ModelState(WeightBank([w, -w, w, -w], [1.0, 1.0, -1.0, -1.0]), 0.0)
    assert predict(model, DataSet([[1.0, 2.0]], [0.0])).tolist() == [0.0]


def test_predict_dimension_mismatch():
    with pytest.raises(ValueError):
        predict(ModelState(WeightBank([[1.0]]), 0.0), DataSet([[1.0, 2.0]], [0.0]))


def test_loss_values():
    assert loss_from_predictions([2.0], [0.0]) == 2.0
    assert loss_from_predictions([1.0, 3.0], [1.0, 3.0]) == 0.0
    assert loss_from_predictions([1.0, -1.0], [0.0, 0.0]) == 1.0


def test_loss_via_model():
    model = ModelState(WeightBank([[2.0]], [1.0]), 0.0)
    assert loss(model, DataSet([[1.0]], [0.0])) == 2.0


def test_gradient_scalar():
    model = ModelState(WeightBank([[2.0]], [1.0]), 0.0)
    g = gradient(model, DataSet([[1.0]], [0.0]))
    assert g.tolist() == [[2.0]]


def test_gradient_no_fire_is_zero():
    model = ModelState(WeightBank([[1.0, 1.0], [-1.0, 0.5]], [1.0, -1.0]), 5.0)
    g = gradient(model, DataSet([[0.3, 0.2], [0.1, -0.4]], [1.0, -1.0]))
    assert np.all(g == 0.0)


def _finite_difference(model, data, h=1e-6):
    W = model.weights.weights
    out = np.empty_like(W)
    for r in range(W.shape[0]):
        for k in range(W.shape[1]):
            plus, minus = W.copy(), W.copy()
            plus[r, k] += h
            minus[r, k] -= h
            lp = loss(ModelState(model.weights.with_weights(plus), model.b), data)
            lm = loss(ModelState(model.weights.with_weights(minus), model.b), data)
            out[r, k] = (lp - lm) / (2 * h)
    return out


def test_gradient_matches_finite_differences(rng):
    checked = 0
    while checked < 20:
        n, m, d = int(rng.integers(1, 6)), int(rng.integers(1, 9)), int(rng.integers(1, 5))
        X = rng.uniform(-1, 1, (n, d))
        W = rng.uniform(-1, 1, (m, d))
        b = float(rng.uniform(0, 0.3))
        if np.min(np.abs(W @ X.T - b)) <= 1e-3:
            continue  # too close to a kink
        model = ModelState(WeightBank(W, np.where(rng.random(m) < 0.5, -1.0, 1.0)), b)
        data = DataSet(X, rng.uniform(-1, 1, n))
        g = gradient(model, data)
        assert np.max(np.abs(g - _finite_difference(model, data))) <= 1e-5
        checked += 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 12), st.integers(1, 60), st.integers(1, 6))
def test_sparse_gradient_equals_dense(seed, n, m, d):
    g = np.random.default_rng(seed)
    model = ModelState(
        WeightBank(g.standard_normal((m, d)), np.where(g.random(m) < 0.5, -1.0, 1.0)),
        float(g.uniform(0, 1)),
    )
    data = DataSet(g.standard_normal((n, d)), g.standard_normal(n))
    fs = fire_sets_bruteforce(model.weights, data, model.b)
    dense = gradient(model, data)
    sparse = gradient(model, data, fs, check=True)
    assert np.array_equal(dense, sparse)
    assert predict(model, data).tobytes() == predict(model, data, fs).tobytes()


def test_gradient_rejects_wrong_fire_sets(tiny):
    W, X = tiny
    model = ModelState(W, 0.0)
    wrong = FireSets([[1], [0]], 2)
    with pytest.raises(ValueError, match="fire sets"):
        gradient(model, X, wrong, check=True)


def test_fire_set_scale_invariance_at_zero_threshold(rng):
    W = WeightBank(rng.standard_normal((30, 4)))
    X = DataSet(rng.standard_normal((6, 4)), np.zeros(6))
    scaled = DataSet(3.5 * X.points, np.zeros(6))
    assert fire_sets_bruteforce(W, X, 0.0) == fire_sets_bruteforce(W, scaled, 0.0)


def test_teacher_dataset():
    ds = teacher_dataset(10, 5, RngSpec(1))
    assert ds.unit_norm
    assert np.all(np.isfinite(ds.labels))
    assert teacher_dataset(10, 5, RngSpec(1)).labels.tobytes() == ds.labels.tobytes()
