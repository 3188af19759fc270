"""Sparsity right after Gaussian initialization.

For unit-norm x and w ~ N(0, I_d) the pre-activation <w, x> is standard
normal, so each neuron fires with probability Q(b) = Pr[N(0,1) > b].  With
b = sqrt(0.4 ln m) this is below exp(-b^2/2) = m^{-1/5}.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from corrtree import _kernels as K
from corrtree.core_types import DataSet, RngSpec, ceil_pow45, gaussian_dataset, gaussian_init, is_unit_norm
from corrtree.firesets import fire_sets_bruteforce
from corrtree.network import select_b

__all__ = [
    "SparsityReport",
    "fire_sets_bruteforce",
    "gaussian_upper_tail",
    "measure_init_sparsity",
]


def gaussian_upper_tail(b: float) -> float:
    """Pr[N(0,1) > b] = erfc(b / sqrt 2) / 2, using the C library erfc."""
    return 0.5 * math.erfc(b / math.sqrt(2.0))


@dataclass
class SparsityReport:
    m: int
    n: int
    d: int
    b: float
    fire_counts: np.ndarray  # trials x n, k_{i,0} per trial
    seeds: list[int]

    @property
    def trials(self) -> int:
        return self.fire_counts.shape[0]

    @property
    def mean_fraction(self) -> float:
        return float(self.fire_counts.mean() / self.m)

    @property
    def max_count(self) -> int:
        return int(self.fire_counts.max())

    @property
    def predicted_fraction(self) -> float:
        return gaussian_upper_tail(self.b)

    @property
    def bound(self) -> int:
        return ceil_pow45(self.m)

    @property
    def bound_fraction(self) -> float:
        return self.m ** -0.2

    @property
    def within_bound(self) -> bool:
        return self.max_count <= self.bound

    @property
    def tail_constant(self) -> float:
        """Observed mean count divided by m * exp(-b^2/2)."""
        return float(self.fire_counts.mean() / (self.m * math.exp(-self.b**2 / 2)))

    def rows(self) -> list[dict]:
        return [
            {
                "m": self.m,
                "n": self.n,
                "d": self.d,
                "b": self.b,
                "trials": self.trials,
                "mean_fraction": self.mean_fraction,
                "predicted_fraction": self.predicted_fraction,
                "bound_fraction": self.bound_fraction,
                "max_count": self.max_count,
                "bound": self.bound,
                "tail_constant": self.tail_constant,
            }
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        rows = self.rows()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()

    def __str__(self) -> str:
        return (
            f"m={self.m} n={self.n} d={self.d} b={self.b:.6f} trials={self.trials}\n"
            f"  mean fire fraction {self.mean_fraction:.5f}  (Gaussian tail Q(b)={self.predicted_fraction:.5f}, "
            f"m^-1/5={self.bound_fraction:.5f})\n"
            f"  max k_i0 = {self.max_count}  vs  m^4/5 bound {self.bound}"
            f"  [{'ok' if self.within_bound else 'VIOLATED'}]\n"
            f"  mean count / (m exp(-b^2/2)) = {self.tail_constant:.4f}"
        )


def measure_init_sparsity(
    m: int,
    d: int,
    n: int,
    trials: int,
    rng: RngSpec,
    data: DataSet | None = None,
    b: float | None = None,
) -> SparsityReport:
    """Count firing neurons per data point over ``trials`` fresh initializations."""
    if data is None:
        data = gaussian_dataset(n, d, rng.child(0), unit_norm=True)
    if not is_unit_norm(data.points):
        raise ValueError("data rows must have unit norm")
    n, d = data.n, data.d
    b = select_b(m) if b is None else float(b)
    X = np.ascontiguousarray(data.points)
    counts = np.empty((trials, n), dtype=np.int64)
    seeds = []
    for k in range(trials):
        spec = rng.child(1, k)
        seeds.append(spec.seed)
        W = gaussian_init(m, d, spec)
        G = K.inner_products(np.ascontiguousarray(W.weights), X)
        counts[k] = (G > b).sum(axis=1)
    return SparsityReport(m, n, d, b, counts, seeds)
