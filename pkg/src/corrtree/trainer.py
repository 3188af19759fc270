"""Gradient descent on the shifted-ReLU network: dense, DTree and WTree variants.

All three produce the same weights bit for bit.  The tree variants only
touch neurons that fire on some data point, which is where the sublinear
per-iteration cost comes from.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from corrtree import _kernels as K
from corrtree.core_types import DataSet, WeightBank, ceil_pow45
from corrtree.correlation import CorrelationDTree, CorrelationWTree
from corrtree.firesets import FireSets, FlipLog, record_flips
from corrtree.maxtree import VisitCounter
from corrtree.network import select_b

log = logging.getLogger(__name__)

ALGOS = ("dense", "dtree", "wtree")
CSV_HEADER = [
    "iter",
    "loss",
    "err_norm",
    "total_fires",
    "visited_nodes",
    "neurons_updated",
    "max_movement",
    "wall_ns",
]

StepCallback = Callable[[int, np.ndarray, FireSets], None]


class DivergenceError(RuntimeError):
    def __init__(self, iteration: int, loss: float):
        super().__init__(f"training diverged at iteration {iteration}: loss={loss!r}")
        self.iteration = iteration
        self.loss = loss


@dataclass
class TrainConfig:
    eta: float
    iters: int
    b: float | None = None  # None selects sqrt(0.4 ln m)
    seed: int = 0
    algo: str = "dense"
    track_flips: bool = False
    divergence_limit: float = 1e12

    def __post_init__(self):
        if not self.eta >= 0:
            raise ValueError(f"learning rate must be nonnegative, got {self.eta}")
        if self.iters < 1:
            raise ValueError("iters must be at least 1")
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algo {self.algo!r}; expected one of {ALGOS}")

    def threshold(self, m: int) -> float:
        return select_b(m) if self.b is None else float(self.b)


@dataclass
class IterationRecord:
    iter: int
    loss: float
    err_norm: float
    total_fires: int
    visited_nodes: int
    neurons_updated: int
    max_movement: float
    wall_ns: int
    max_fires: int = 0
    tree_updates: int = 0


@dataclass
class TrainMetrics:
    algo: str
    m: int
    n: int
    b: float
    records: list[IterationRecord] = field(default_factory=list)
    final_loss: float = math.nan
    init_visited: int = 0
    flips: FlipLog | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def fire_bound(self) -> int:
        return ceil_pow45(self.m)

    def bound_violations(self) -> int:
        """Iterations where some data point had more than m^{4/5} firing neurons."""
        return int(sum(r.max_fires > self.fire_bound for r in self.records))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for r in self.records:
                w.writerow(
                    [
                        r.iter,
                        f"{r.loss:.17g}",
                        f"{r.err_norm:.17g}",
                        r.total_fires,
                        r.visited_nodes,
                        r.neurons_updated,
                        f"{r.max_movement:.17g}",
                        r.wall_ns,
                    ]
                )


class _Loop:
    """Bookkeeping shared by the three trainers."""

    def __init__(self, X: DataSet, W0: WeightBank, cfg: TrainConfig, algo: str):
        if W0.d != X.d:
            raise ValueError(f"dimension mismatch: weights d={W0.d}, data d={X.d}")
        self.cfg = cfg
        self.X = np.ascontiguousarray(X.points)
        self.y = X.labels
        self.a = W0.signs
        self.W0 = np.array(W0.weights, order="C")
        self.W = self.W0.copy()
        self.m, self.n = W0.m, X.n
        self.b = cfg.threshold(self.m)
        self.movement = np.zeros(self.m)
        self.metrics = TrainMetrics(algo, self.m, self.n, self.b)
        if cfg.track_flips:
            self.metrics.flips = FlipLog(self.m, self.n)
        self._prev: FireSets | None = None

    def residual(self, t: int, u: np.ndarray) -> tuple[np.ndarray, float]:
        res = u - self.y
        loss = 0.5 * float(np.dot(res, res))
        if not math.isfinite(loss) or loss > self.cfg.divergence_limit:
            raise DivergenceError(t, loss)
        return res, loss

    def finish_step(self, t, start, fs: FireSets, res, loss, cols, visited, updates, callback):
        diff = self.W[cols] - self.W0[cols]
        self.movement[cols] = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        sizes = fs.data_sizes
        self.metrics.records.append(
            IterationRecord(
                iter=t,
                loss=loss,
                err_norm=float(np.linalg.norm(res)),
                total_fires=int(sizes.sum()),
                visited_nodes=int(visited),
                neurons_updated=int(len(cols)),
                max_movement=float(self.movement.max()),
                wall_ns=time.perf_counter_ns() - start,
                max_fires=int(sizes.max()),
                tree_updates=int(updates),
            )
        )
        if self.metrics.flips is not None:
            if self._prev is not None:
                record_flips(self.metrics.flips, self._prev, fs, t)
            self._prev = fs
        if callback is not None:
            callback(t, self.W, fs)

    def done(self, final_loss: float) -> tuple[WeightBank, TrainMetrics]:
        self.metrics.final_loss = final_loss
        over = self.metrics.bound_violations()
        if over:
            log.warning(
                "%d iterations had a data point with more than m^{4/5}=%d firing neurons",
                over,
                self.metrics.fire_bound,
            )
        return WeightBank(self.W, self.a), self.metrics


def train_dense(
    X: DataSet, W0: WeightBank, cfg: TrainConfig, callback: StepCallback | None = None
) -> tuple[WeightBank, TrainMetrics]:
    """Full-gradient descent evaluating all n*m inner products each step."""
    lp = _Loop(X, W0, cfg, "dense")
    everyone = np.arange(lp.m, dtype=np.int64)
    for t in range(cfg.iters):
        start = time.perf_counter_ns()
        u, fire = K.dense_forward(lp.W, lp.a, lp.X, lp.b)
        res, loss = lp.residual(t, u)
        G = K.dense_gradient(lp.W, lp.a, lp.X, res, lp.b)
        K.apply_step(lp.W, G, cfg.eta, everyone)
        fs = FireSets.from_mask(fire)
        lp.finish_step(t, start, fs, res, loss, fs.union(), lp.n * lp.m, 0, callback)
    u, _ = K.dense_forward(lp.W, lp.a, lp.X, lp.b)
    return lp.done(0.5 * float(np.dot(u - lp.y, u - lp.y)))


def _sparse_step(lp: _Loop, t: int, fs: FireSets, G: np.ndarray):
    indptr, indices = fs.csr()
    u = K.sparse_forward(lp.W, lp.a, lp.X, lp.b, indptr, indices)
    res, loss = lp.residual(t, u)
    cols = fs.union()
    K.sparse_gradient(G, lp.a, lp.X, res, indptr, indices, cols)
    K.apply_step(lp.W, G, lp.cfg.eta, cols)
    return res, loss, cols


def _sparse_loss(lp: _Loop, fs: FireSets) -> float:
    indptr, indices = fs.csr()
    u = K.sparse_forward(lp.W, lp.a, lp.X, lp.b, indptr, indices)
    return 0.5 * float(np.dot(u - lp.y, u - lp.y))


def train_dtree(
    X: DataSet, W0: WeightBank, cfg: TrainConfig, callback: StepCallback | None = None
) -> tuple[WeightBank, TrainMetrics]:
    """Descent with one max-tree per data point locating the firing neurons."""
    lp = _Loop(X, W0, cfg, "dtree")
    tree = CorrelationDTree(W0, X)
    G = np.zeros_like(lp.W)

    def fire_sets(counter):
        return FireSets([tree.query(i, lp.b, True, counter) for i in range(lp.n)], lp.m)

    for t in range(cfg.iters):
        start = time.perf_counter_ns()
        counter = VisitCounter()
        fs = fire_sets(counter)
        res, loss, cols = _sparse_step(lp, t, fs, G)
        tree.update_many(lp.W, cols)
        lp.finish_step(t, start, fs, res, loss, cols, counter.nodes_visited, len(cols), callback)
    return lp.done(_sparse_loss(lp, fire_sets(None)))


def train_wtree(
    X: DataSet, W0: WeightBank, cfg: TrainConfig, callback: StepCallback | None = None
) -> tuple[WeightBank, TrainMetrics]:
    """Descent with one max-tree per neuron; fire sets are maintained incrementally."""
    lp = _Loop(X, W0, cfg, "wtree")
    tree = CorrelationWTree(W0, X)
    G = np.zeros_like(lp.W)

    init_counter = VisitCounter()
    per_neuron = [tree.query(r, lp.b, True, init_counter) for r in range(lp.m)]
    per_data: list[set[int]] = [set() for _ in range(lp.n)]
    for r, hits in enumerate(per_neuron):
        for i in hits:
            per_data[i].add(r)
    lp.metrics.init_visited = init_counter.nodes_visited

    def snapshot() -> FireSets:
        return FireSets([sorted(s) for s in per_data], lp.m, per_neuron=per_neuron)

    for t in range(cfg.iters):
        start = time.perf_counter_ns()
        counter = VisitCounter()
        fs = snapshot()
        res, loss, cols = _sparse_step(lp, t, fs, G)
        for r in cols:
            for i in per_neuron[r]:
                per_data[i].discard(int(r))
            tree.update(lp.W[r], int(r))
            per_neuron[r] = tree.query(int(r), lp.b, True, counter)
            for i in per_neuron[r]:
                per_data[i].add(int(r))
        lp.finish_step(t, start, fs, res, loss, cols, counter.nodes_visited, len(cols), callback)
    return lp.done(_sparse_loss(lp, snapshot()))


TRAINERS = {"dense": train_dense, "dtree": train_dtree, "wtree": train_wtree}


def train(
    X: DataSet, W0: WeightBank, cfg: TrainConfig, callback: StepCallback | None = None
) -> tuple[WeightBank, TrainMetrics]:
    return TRAINERS[cfg.algo](X, W0, cfg, callback)
