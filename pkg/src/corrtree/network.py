"""Two-layer network with threshold-shifted ReLU and fixed +-1 output weights.

    f(W, x, a) = (1 / sqrt(m)) * sum_r a_r * max(<w_r, x> - b, 0)
    L(W)       = 1/2 * sum_i (f(W, x_i, a) - y_i)^2

A neuron fires on x when <w_r, x> > b (strictly), and the gradient uses the
same indicator, so the subgradient at the kink is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from corrtree import _kernels as K
from corrtree.core_types import DataSet, RngSpec, WeightBank, box_muller, gaussian_dataset, random_signs
from corrtree.firesets import FireSets, fire_sets_bruteforce


@dataclass(frozen=True)
class ModelState:
    weights: WeightBank
    b: float
    t: int = 0

    def __post_init__(self):
        if not self.b >= 0:
            raise ValueError(f"threshold b must be nonnegative, got {self.b}")


def select_b(m: int) -> float:
    """sqrt(0.4 ln m); makes exp(-b^2 / 2) = m^{-1/5}."""
    if m < 2:
        raise ValueError("select_b needs m >= 2")
    return math.sqrt(0.4 * math.log(m))


def sigma_b(z, b: float):
    return np.maximum(np.asarray(z, dtype=np.float64) - b, 0.0)


def _arrays(model: ModelState, X: DataSet):
    if model.weights.d != X.d:
        raise ValueError(f"dimension mismatch: weights d={model.weights.d}, data d={X.d}")
    W = np.ascontiguousarray(model.weights.weights)
    return W, model.weights.signs, np.ascontiguousarray(X.points)


def predict(model: ModelState, X: DataSet, fire_sets: FireSets | None = None) -> np.ndarray:
    """u_i = f(W, x_i, a) for every data point."""
    W, a, pts = _arrays(model, X)
    if fire_sets is None:
        u, _ = K.dense_forward(W, a, pts, float(model.b))
        return u
    indptr, indices = fire_sets.csr()
    return K.sparse_forward(W, a, pts, float(model.b), indptr, indices)


def loss_from_predictions(u: np.ndarray, y: np.ndarray) -> float:
    r = np.asarray(u, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return 0.5 * float(np.dot(r, r))


def loss(model: ModelState, X: DataSet) -> float:
    return loss_from_predictions(predict(model, X), X.labels)


def gradient(
    model: ModelState,
    X: DataSet,
    fire_sets: FireSets | None = None,
    check: bool = False,
) -> np.ndarray:
    """dL/dw_r for every neuron, returned as an m x d array (row r = column r of dL/dW).

    Passing ``fire_sets`` restricts both the forward pass and the sums to
    the listed (i, r) pairs; with the true fire sets the result is
    bit-identical to the dense computation.  ``check=True`` verifies them
    against a brute-force scan first.
    """
    W, a, pts = _arrays(model, X)
    b = float(model.b)
    if fire_sets is None:
        u, _ = K.dense_forward(W, a, pts, b)
        return K.dense_gradient(W, a, pts, u - X.labels, b)
    if check and fire_sets != fire_sets_bruteforce(model.weights, X, b):
        raise ValueError("supplied fire sets do not match the model")
    indptr, indices = fire_sets.csr()
    u = K.sparse_forward(W, a, pts, b, indptr, indices)
    G = np.zeros_like(W)
    K.sparse_gradient(G, a, pts, u - X.labels, indptr, indices, fire_sets.union())
    return G


def teacher_dataset(n: int, d: int, rng: RngSpec, width: int = 4) -> DataSet:
    """Unit-norm Gaussian inputs labelled by a random plain-ReLU teacher.

    y = (1 / sqrt(width)) * sum_j c_j * max(<v_j, x>, 0) with unit-norm v_j
    and c_j uniform on {-1, +1}.
    """
    X = gaussian_dataset(n, d, rng.child(0), unit_norm=True)
    V = box_muller(rng.child(2).generator(), width * d).reshape(width, d)
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    c = random_signs(rng.child(3).generator(), width)
    y = np.maximum(X.points @ V.T, 0.0) @ c / math.sqrt(width)
    return DataSet(X.points, y, unit_norm=True)
