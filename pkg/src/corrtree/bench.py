"""Scaling benchmark: per-iteration operation counts as the width m grows."""

from __future__ import annotations

import csv
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from corrtree.core_types import RngSpec, gaussian_dataset, gaussian_init
from corrtree.trainer import TrainConfig, train

BENCH_HEADER = ["m", "n", "d", "algo", "total_fires", "visited_nodes", "neurons_updated", "wall_ns"]


@dataclass
class BenchRow:
    m: int
    n: int
    d: int
    algo: str
    total_fires: float
    visited_nodes: float
    neurons_updated: float
    wall_ns: float


def parse_m_list(text: str) -> list[int]:
    """Accepts "2^10..2^16", "1024,2048" or a single integer."""
    text = text.replace(" ", "")
    geo = re.fullmatch(r"2\^(\d+)\.\.2\^(\d+)", text)
    if geo:
        lo, hi = int(geo.group(1)), int(geo.group(2))
        if lo > hi:
            raise ValueError(f"empty range {text!r}")
        return [2**k for k in range(lo, hi + 1)]
    out = []
    for part in text.split(","):
        p = re.fullmatch(r"2\^(\d+)", part)
        out.append(2 ** int(p.group(1)) if p else int(part))
    if not out or min(out) < 2:
        raise ValueError("every m must be at least 2")
    return out


def default_threads() -> int:
    env = os.environ.get("CORRTREE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _cell(args):
    m, n, d, iters, seed, eta, algos = args
    rng = RngSpec(seed)
    X = gaussian_dataset(n, d, rng.child(0), unit_norm=True)
    W0 = gaussian_init(m, d, rng.child(1))
    out = {}
    for algo in algos:
        _, met = train(X, W0, TrainConfig(eta=eta, iters=iters, algo=algo, seed=seed))
        out[algo] = (
            met.column("total_fires").mean(),
            met.column("visited_nodes").mean(),
            met.column("neurons_updated").mean(),
            met.column("wall_ns").mean(),
        )
    return m, out


def run_bench(
    m_list,
    n: int = 8,
    d: int = 16,
    iters: int = 3,
    seeds=(0, 1, 2, 3, 4),
    algos=("dense", "dtree", "wtree"),
    eta: float = 0.1,
    threads: int | None = None,
) -> list[BenchRow]:
    """One row per (m, algo): counters averaged over iterations and seeds."""
    cells = [(m, n, d, iters, s, eta, tuple(algos)) for m in m_list for s in seeds]
    threads = default_threads() if threads is None else threads
    if threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_cell, cells))
    else:
        results = [_cell(c) for c in cells]

    rows = []
    for m in m_list:
        for algo in algos:
            stats = np.array([res[algo] for mm, res in results if mm == m])
            mean = stats.mean(axis=0)
            rows.append(BenchRow(m, n, d, algo, *map(float, mean)))
    return rows


def fit_slope(rows: list[BenchRow], algo: str | None = None, column: str = "total_fires") -> float | None:
    """Least-squares slope of log(column) against log(m); None for fewer than two m values."""
    algo = algo or rows[0].algo
    pts = [(r.m, getattr(r, column)) for r in rows if r.algo == algo]
    if len({m for m, _ in pts}) < 2:
        return None
    x = np.log([m for m, _ in pts])
    y = np.log([v for _, v in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def write_bench_csv(rows: list[BenchRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_HEADER)
        w.writeheader()
        for r in rows:
            rec = asdict(r)
            for key in ("total_fires", "visited_nodes", "neurons_updated", "wall_ns"):
                rec[key] = f"{rec[key]:.17g}"
            w.writerow(rec)
