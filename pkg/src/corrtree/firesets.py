"""Fire sets, their brute-force oracle, and flip tracking."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from corrtree import _kernels as K
from corrtree.core_types import DataSet, WeightBank


class FireSets:
    """Per-data fire sets S_i (sorted neuron ids) with the dual per-neuron view.

    The dual sets are derived on first access, so trainers that only need
    S_i never pay O(m) per iteration for them.
    """

    def __init__(self, per_data, m: int, per_neuron=None):
        self.per_data = [np.asarray(s, dtype=np.int64) for s in per_data]
        self.m = m
        if per_neuron is not None:
            if len(per_neuron) != m:
                raise ValueError(f"expected {m} per-neuron sets, got {len(per_neuron)}")
            self.__dict__["per_neuron"] = [np.asarray(s, dtype=np.int64) for s in per_neuron]

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "FireSets":
        return cls([np.flatnonzero(row) for row in mask], mask.shape[1])

    @classmethod
    def from_per_neuron(cls, per_neuron, n: int) -> "FireSets":
        buckets = [[] for _ in range(n)]
        for r, data_ids in enumerate(per_neuron):
            for i in data_ids:
                buckets[int(i)].append(r)
        return cls(buckets, len(per_neuron))

    @property
    def n(self) -> int:
        return len(self.per_data)

    @cached_property
    def per_neuron(self) -> list[np.ndarray]:
        buckets = [[] for _ in range(self.m)]
        for i, s in enumerate(self.per_data):
            for r in s:
                buckets[r].append(i)
        return [np.asarray(b, dtype=np.int64) for b in buckets]

    @property
    def data_sizes(self) -> np.ndarray:
        return np.array([len(s) for s in self.per_data], dtype=np.int64)

    @property
    def neuron_sizes(self) -> np.ndarray:
        return np.array([len(s) for s in self.per_neuron], dtype=np.int64)

    @property
    def total(self) -> int:
        return int(sum(len(s) for s in self.per_data))

    def union(self) -> np.ndarray:
        if not self.per_data:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(self.per_data))

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(self.data_sizes)
        if self.total:
            indices = np.concatenate(self.per_data)
        else:
            indices = np.empty(0, dtype=np.int64)
        return indptr, indices

    def mask(self) -> np.ndarray:
        out = np.zeros((self.n, self.m), dtype=bool)
        for i, s in enumerate(self.per_data):
            out[i, s] = True
        return out

    def check_duality(self) -> bool:
        for r, data_ids in enumerate(self.per_neuron):
            for i in data_ids:
                s = self.per_data[i]
                pos = np.searchsorted(s, r)
                if pos == len(s) or s[pos] != r:
                    return False
        return int(self.neuron_sizes.sum()) == self.total

    def __eq__(self, other) -> bool:
        if not isinstance(other, FireSets):
            return NotImplemented
        return self.m == other.m and self.n == other.n and all(
            np.array_equal(a, b) for a, b in zip(self.per_data, other.per_data)
        )

    def __repr__(self) -> str:
        return f"FireSets(n={self.n}, m={self.m}, total={self.total})"


def fire_sets_bruteforce(W: WeightBank, X: DataSet, b: float, strict: bool = True) -> FireSets:
    """Exact fire sets from an O(nmd) scan of every inner product."""
    if W.d != X.d:
        raise ValueError(f"dimension mismatch: weights d={W.d}, data d={X.d}")
    G = K.inner_products(np.ascontiguousarray(W.weights), np.ascontiguousarray(X.points))
    return FireSets.from_mask(G > b if strict else G >= b)


@dataclass
class FlipLog:
    """Per-iteration flip sets and the shrinking never-flipped sets."""

    m: int
    n: int
    flips: dict[int, list[np.ndarray]] = field(default_factory=dict)
    noflip: list[np.ndarray] = field(default=None)

    def __post_init__(self):
        if self.noflip is None:
            self.noflip = [np.arange(self.m, dtype=np.int64) for _ in range(self.n)]

    def noflip_sizes(self) -> np.ndarray:
        return np.array([len(s) for s in self.noflip], dtype=np.int64)


def record_flips(log: FlipLog, old: FireSets, new: FireSets, t: int) -> list[np.ndarray]:
    """Append S_{i,flip}(t) = old S_i xor new S_i and shrink the no-flip sets."""
    step = []
    for i, (a, b) in enumerate(zip(old.per_data, new.per_data)):
        flipped = np.setxor1d(a, b, assume_unique=True)
        step.append(flipped)
        if flipped.size:
            log.noflip[i] = np.setdiff1d(log.noflip[i], flipped, assume_unique=True)
    log.flips[t] = step
    return step
