"""Dynamic detection of firing neurons, and Max-IP by binary search over it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from corrtree import _kernels as K
from corrtree.core_types import DataSet, WeightBank, ceil_pow45
from corrtree.correlation import CorrelationDTree
from corrtree.maxtree import VisitCounter


@dataclass(frozen=True)
class DdfnQueryResult:
    """Either a k x 2 array of (i, j) pairs in lexicographic order, or overflow."""

    pairs: np.ndarray | None

    @property
    def overflow(self) -> bool:
        return self.pairs is None


OVERFLOW = DdfnQueryResult(None)


class DdfnInstance:
    """Maintains X (n fixed points) and Y (m updatable points) against threshold b.

    Pairs with <x_i, y_j> >= b are reported unless there are more than
    ceil(m^{4/5}) * n of them, in which case the query reports overflow.
    """

    def __init__(self, X, Y, b: float):
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        if X.ndim != 2 or Y.ndim != 2:
            raise ValueError("X and Y must be 2-d point arrays")
        if X.shape[1] != Y.shape[1]:
            raise ValueError(f"dimension mismatch: X d={X.shape[1]}, Y d={Y.shape[1]}")
        self.b = float(b)
        self._tree = CorrelationDTree(WeightBank(Y), DataSet(X, np.zeros(X.shape[0])))
        self.queries = 0
        self.visited = VisitCounter()

    @property
    def n(self) -> int:
        return self._tree.n

    @property
    def m(self) -> int:
        return self._tree.m

    @property
    def cap(self) -> int:
        return ceil_pow45(self.m) * self.n

    @property
    def X(self) -> np.ndarray:
        return self._tree.X

    @property
    def Y(self) -> np.ndarray:
        return self._tree.W

    def update(self, j: int, z) -> None:
        self._tree.update(z, j)

    def query(self) -> DdfnQueryResult:
        self.queries += 1
        remaining = self.cap
        blocks = []
        for i in range(self.n):
            hits = self._tree.query(i, self.b, strict=False, counter=self.visited, limit=remaining)
            if len(hits) > remaining:
                return OVERFLOW
            remaining -= len(hits)
            blocks.append(np.column_stack([np.full(len(hits), i, dtype=np.int64), hits]))
        return DdfnQueryResult(np.concatenate(blocks) if blocks else np.empty((0, 2), np.int64))


def ddfn_init(X, Y, b: float) -> DdfnInstance:
    return DdfnInstance(X, Y, b)


def ddfn_update(t: DdfnInstance, j: int, z) -> None:
    t.update(j, z)


def ddfn_query(t: DdfnInstance) -> DdfnQueryResult:
    return t.query()


def ddfn_bruteforce(X, Y, b: float) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    G = K.inner_products(np.ascontiguousarray(Y), np.ascontiguousarray(X))
    return np.argwhere(G >= b)


def _integer_array(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-d point array")
    if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
        raise ValueError(f"{name} must have integer coordinates")
    return arr


def max_ip_rounds_bound(d: int, entry_bound: int) -> int:
    return (2 * d * entry_bound**2).bit_length() + 1


def max_ip_via_ddfn(X, Y, entry_bound: int, return_rounds: bool = False):
    """max_{i,j} <x_i, y_j> for integer points, found with DDFN emptiness queries.

    Each y_j gets an extra coordinate t and each x_i an extra -1, so with
    threshold 0 a pair is reported exactly when <x_i, y_j> >= t.  The answer
    is the largest t in [-d B^2, d B^2] with a nonempty report.
    """
    X = _integer_array(X, "X")
    Y = _integer_array(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ValueError("dimension mismatch")
    B = int(entry_bound)
    if B < 0 or np.any(np.abs(X) > B) or np.any(np.abs(Y) > B):
        raise ValueError(f"coordinates exceed entry bound {entry_bound}")
    d = X.shape[1]
    bound = d * B * B
    if bound >= 2**52:
        raise ValueError("entry bound too large for exact float arithmetic")

    lo, hi = -bound, bound
    Xa = np.hstack([X, -np.ones((X.shape[0], 1))])
    Ya = np.hstack([Y, np.full((Y.shape[0], 1), float(lo))])
    inst = DdfnInstance(Xa, Ya, 0.0)
    rounds = 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        for j in range(inst.m):
            row = inst.Y[j].copy()
            row[d] = float(mid)
            inst.update(j, row)
        rounds += 1
        res = inst.query()
        if res.overflow or len(res.pairs):
            lo = mid
        else:
            hi = mid - 1
    return (lo, rounds) if return_rounds else lo
