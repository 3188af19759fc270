"""Tournament max-tree over a fixed number of leaves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from corrtree import _kernels as K


@dataclass
class VisitCounter:
    nodes_visited: int = 0


def _capacity(leaf_count: int) -> int:
    return 1 << max(leaf_count - 1, 0).bit_length()


def tree_depth(leaf_count: int) -> int:
    return _capacity(leaf_count).bit_length() - 1


def visit_bound(k: int, leaf_count: int) -> int:
    """Upper bound on nodes examined by a query that reports ``k`` leaves."""
    return 2 * (k + 1) * (tree_depth(leaf_count) + 1) + 1


class MaxTree:
    """Array-backed complete binary tree; each internal node holds the max of its children.

    Leaves beyond ``leaf_count`` are padded with -inf, which never wins a max
    and is never reported.  ``nodes`` may be a row view into a larger array so
    that DTree/WTree can keep all of their trees in one block.
    """

    def __init__(self, leaf_count: int, nodes: np.ndarray | None = None):
        if leaf_count < 1:
            raise ValueError("a max-tree needs at least one leaf")
        self.leaf_count = leaf_count
        self.capacity = _capacity(leaf_count)
        self.depth = tree_depth(leaf_count)
        if nodes is None:
            nodes = np.full(2 * self.capacity, -np.inf)
        if nodes.shape != (2 * self.capacity,):
            raise ValueError("node buffer has the wrong size")
        self.nodes = nodes

    @classmethod
    def build(cls, values) -> "MaxTree":
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise ValueError("cannot build a max-tree from an empty sequence")
        t = cls(values.size)
        K.build(t.nodes, values, t.capacity)
        return t

    @property
    def root(self) -> float:
        return float(self.nodes[1])

    def leaf(self, i: int) -> float:
        return float(self.nodes[self.capacity + i])

    def leaves(self) -> np.ndarray:
        return self.nodes[self.capacity : self.capacity + self.leaf_count].copy()

    def update_leaf(self, i: int, value: float) -> int:
        """Set leaf ``i``; returns the number of node values written."""
        if not 0 <= i < self.leaf_count:
            raise IndexError(f"leaf {i} out of range for {self.leaf_count} leaves")
        return K.update_leaf(self.nodes, self.capacity, i, float(value))

    def query_above(
        self,
        tau: float,
        strict: bool = True,
        counter: VisitCounter | None = None,
        limit: int = -1,
    ) -> np.ndarray:
        """Leaf indices with value > tau (or >= tau when not strict), ascending.

        With ``limit >= 0`` the search stops after ``limit + 1`` hits, so a
        result longer than ``limit`` means "more than limit".
        """
        out = np.empty(self.leaf_count, dtype=np.int64)
        count, visited = K.query(
            self.nodes, self.capacity, self.leaf_count, float(tau), bool(strict), int(limit), out
        )
        if counter is not None:
            counter.nodes_visited += visited
        return out[:count]

    def check_heap(self) -> bool:
        P = self.capacity
        kids = np.maximum(self.nodes[2 : 2 * P : 2], self.nodes[3 : 2 * P : 2])
        return bool(np.array_equal(self.nodes[1:P], kids))

    def __len__(self) -> int:
        return self.leaf_count

    def __repr__(self) -> str:
        return f"MaxTree(L={self.leaf_count}, root={self.root!r})"


def scan_above(values, tau: float, strict: bool = True) -> np.ndarray:
    """Linear-scan reference for :meth:`MaxTree.query_above`."""
    values = np.asarray(values)
    hit = values > tau if strict else values >= tau
    return np.flatnonzero(hit)

