"""Weight-data correlation trees.

``CorrelationDTree`` keeps one max-tree per data point over the m inner
products <w_r, x_i>; a weight update walks n leaf-to-root paths.
``CorrelationWTree`` keeps one max-tree per neuron over the n inner products
and rebuilds that single tree when its weight changes.
"""

from __future__ import annotations

import numpy as np

from corrtree import _kernels as K
from corrtree.core_types import DataSet, WeightBank
from corrtree.maxtree import MaxTree, VisitCounter, _capacity


def _as_vector(z, d: int) -> np.ndarray:
    z = np.ascontiguousarray(z, dtype=np.float64).reshape(-1)
    if z.shape[0] != d:
        raise ValueError(f"weight has dimension {z.shape[0]}, expected {d}")
    return z


class _CorrelationTrees:
    def __init__(self, weights: WeightBank, data: DataSet, tree_count: int, leaf_count: int):
        if weights.d != data.d:
            raise ValueError(f"dimension mismatch: weights d={weights.d}, data d={data.d}")
        self.data = data
        self.X = np.ascontiguousarray(data.points)
        self.W = np.array(weights.weights, dtype=np.float64, order="C")
        self.signs = weights.signs
        self.leaf_count = leaf_count
        self._P = _capacity(leaf_count)
        self._block = np.empty((tree_count, 2 * self._P))
        self.trees = [MaxTree(leaf_count, self._block[t]) for t in range(tree_count)]
        # operation counters for benchmarking
        self.dot_products = 0
        self.node_writes = 0

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def weights(self) -> WeightBank:
        return WeightBank(self.W, self.signs)

    def _check_neuron(self, r: int) -> None:
        if not 0 <= r < self.m:
            raise IndexError(f"neuron {r} out of range for m={self.m}")

    def _check_point(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"data point {i} out of range for n={self.n}")

    def _leaf_matrix(self) -> np.ndarray:
        P, L = self._P, self.leaf_count
        return self._block[:, P : P + L]


class CorrelationDTree(_CorrelationTrees):
    """n trees, tree i over <w_r, x_i> for r in [m]."""

    def __init__(self, weights: WeightBank, data: DataSet):
        super().__init__(weights, data, data.n, weights.m)
        G = K.inner_products(self.W, self.X)
        K.build_rows(self._block, G, self._P)
        self.dot_products += self.n * self.m

    def update(self, z, r: int) -> int:
        """Replace w_r by z and refresh leaf r in every tree; returns node writes."""
        self._check_neuron(r)
        z = _as_vector(z, self.d)
        self.W[r] = z
        writes = K.dtree_update(self._block, self.X, self.W[r], r, self._P)
        self.dot_products += self.n
        self.node_writes += writes
        return writes

    def update_many(self, Z: np.ndarray, rs: np.ndarray) -> int:
        """Same as calling :meth:`update` for each ``(Z[r], r)`` with r in ``rs``, in order."""
        rs = np.asarray(rs, dtype=np.int64)
        if rs.size and (rs.min() < 0 or rs.max() >= self.m):
            raise IndexError("neuron index out of range")
        if Z.shape != self.W.shape:
            raise ValueError(f"expected a {self.W.shape} weight array, got {Z.shape}")
        self.W[rs] = Z[rs]
        writes = K.dtree_update_many(self._block, self.X, self.W, rs, self._P)
        self.dot_products += self.n * len(rs)
        self.node_writes += writes
        return writes

    def query(
        self,
        i: int,
        tau: float,
        strict: bool = True,
        counter: VisitCounter | None = None,
        limit: int = -1,
    ) -> np.ndarray:
        """Neurons r with <w_r, x_i> > tau (>= when not strict), ascending."""
        self._check_point(i)
        return self.trees[i].query_above(tau, strict, counter, limit)

    def check(self) -> bool:
        """Recompute every inner product and verify leaves and heap order."""
        expected = K.inner_products(self.W, self.X)
        if not np.array_equal(self._leaf_matrix(), expected):
            return False
        return all(t.check_heap() for t in self.trees)


class CorrelationWTree(_CorrelationTrees):
    """m trees, tree r over <w_r, x_i> for i in [n]."""

    def __init__(self, weights: WeightBank, data: DataSet):
        super().__init__(weights, data, weights.m, data.n)
        G = K.inner_products(self.W, self.X)
        K.build_rows(self._block, np.ascontiguousarray(G.T), self._P)
        self.dot_products += self.n * self.m

    def update(self, z, r: int) -> None:
        """Replace w_r by z and rebuild tree r from its n fresh inner products."""
        self._check_neuron(r)
        z = _as_vector(z, self.d)
        self.W[r] = z
        K.wtree_rebuild(self._block[r], self.X, self.W[r], self._P)
        self.dot_products += self.n
        self.node_writes += 2 * self._P - 1

    def query(
        self,
        r: int,
        tau: float,
        strict: bool = True,
        counter: VisitCounter | None = None,
        limit: int = -1,
    ) -> np.ndarray:
        """Data points i with <w_r, x_i> > tau (>= when not strict), ascending."""
        self._check_neuron(r)
        return self.trees[r].query_above(tau, strict, counter, limit)

    def check(self) -> bool:
        expected = K.inner_products(self.W, self.X).T
        if not np.array_equal(self._leaf_matrix(), expected):
            return False
        return all(t.check_heap() for t in self.trees)


def dtree_init(W: WeightBank, X: DataSet) -> CorrelationDTree:
    return CorrelationDTree(W, X)


def dtree_update(t: CorrelationDTree, z, r: int) -> int:
    return t.update(z, r)


def dtree_query(t: CorrelationDTree, i: int, tau: float, strict: bool = True, counter=None):
    return t.query(i, tau, strict, counter)


def wtree_init(W: WeightBank, X: DataSet) -> CorrelationWTree:
    return CorrelationWTree(W, X)


def wtree_update(t: CorrelationWTree, z, r: int) -> None:
    t.update(z, r)


def wtree_query(t: CorrelationWTree, r: int, tau: float, strict: bool = True, counter=None):
    return t.query(r, tau, strict, counter)
