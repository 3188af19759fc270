"""Shared value types, dataset I/O and seeded randomness.

All arrays are float64.  Types are frozen after construction; the arrays
they hold are marked read-only so they can be shared between structures.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"CTDS"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIIB")
_U32_MAX = 2**32 - 1


class FormatError(ValueError):
    """Raised when a dataset file does not match the binary layout."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RngSpec:
    """Seed plus a fixed generator: numpy PCG64 uniforms, Box-Muller normals.

    Child streams are derived with ``SeedSequence([seed, *keys])`` so that
    independent consumers (data, weights, trial k) never share draws.
    """

    seed: int
    algorithm: str = "pcg64+box-muller"

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))

    def child(self, *keys: int) -> "RngSpec":
        ss = np.random.SeedSequence([self.seed, *keys])
        return RngSpec(int(ss.generate_state(1, np.uint64)[0]), self.algorithm)


def box_muller(gen: np.random.Generator, count: int) -> np.ndarray:
    """``count`` standard normals from uniform pairs, cosine branch first."""
    pairs = (count + 1) // 2
    u = gen.random((pairs, 2))
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - U lies in (0, 1]
    angle = 2.0 * np.pi * u[:, 1]
    z = np.empty((pairs, 2))
    z[:, 0] = radius * np.cos(angle)
    z[:, 1] = radius * np.sin(angle)
    return z.reshape(-1)[:count]


def random_signs(gen: np.random.Generator, count: int) -> np.ndarray:
    return np.where(gen.random(count) < 0.5, -1.0, 1.0)


@dataclass(frozen=True)
class DataSet:
    points: np.ndarray
    labels: np.ndarray
    unit_norm: bool = False

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("points must be a non-empty n x d array")
        lab = _frozen(self.labels).reshape(-1)
        if lab.shape[0] != pts.shape[0]:
            raise ValueError(f"expected {pts.shape[0]} labels, got {lab.shape[0]}")
        if self.unit_norm:
            norms = np.sqrt(np.einsum("ij,ij->i", pts, pts))
            if np.any(np.abs(norms - 1.0) > 1e-12):
                raise ValueError("unit_norm flag set but rows are not unit length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class WeightBank:
    """Hidden weights ``weights[r] = w_r`` (m x d) and output signs ``a_r``."""

    weights: np.ndarray
    signs: np.ndarray = field(default=None)

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ValueError("weights must be a non-empty m x d array")
        s = np.ones(w.shape[0]) if self.signs is None else self.signs
        s = _frozen(s).reshape(-1)
        if s.shape[0] != w.shape[0]:
            raise ValueError(f"expected {w.shape[0]} signs, got {s.shape[0]}")
        if not np.all((s == 1.0) | (s == -1.0)):
            raise ValueError("signs must be +1 or -1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "signs", s)

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.weights.shape[1]

    def with_weights(self, weights: np.ndarray) -> "WeightBank":
        return WeightBank(weights, self.signs)


def normalize_rows(ds: DataSet) -> DataSet:
    norms = np.sqrt(np.einsum("ij,ij->i", ds.points, ds.points))
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise ValueError("degenerate data point")
    pts = ds.points / norms[:, None]
    return DataSet(pts, ds.labels, unit_norm=True)


def gaussian_init(m: int, d: int, rng: RngSpec) -> WeightBank:
    """w_r ~ N(0, I_d) and a_r uniform on {-1, +1}, drawn from two child streams."""
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    w = box_muller(rng.child(0).generator(), m * d).reshape(m, d)
    a = random_signs(rng.child(1).generator(), m)
    return WeightBank(w, a)


def gaussian_dataset(n: int, d: int, rng: RngSpec, unit_norm: bool = True) -> DataSet:
    """Gaussian rows with random +-1 labels."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    pts = box_muller(rng.child(0).generator(), n * d).reshape(n, d)
    labels = random_signs(rng.child(1).generator(), n)
    ds = DataSet(pts, labels)
    return normalize_rows(ds) if unit_norm else ds


def save_dataset(ds: DataSet, path) -> None:
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, ds.n, ds.d, int(ds.unit_norm))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(ds.points.astype("<f8").tobytes(order="C"))
        fh.write(ds.labels.astype("<f8").tobytes())


def load_dataset(path) -> DataSet:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError("truncated header")
    magic, version, n, d, flag = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported version {version}")
    if n == 0 or d == 0 or n * d > _U32_MAX:
        raise FormatError(f"invalid size n={n} d={d}")
    need = _HEADER.size + 8 * (n * d + n)
    if len(raw) < need:
        raise FormatError(f"truncated payload: need {need} bytes, have {len(raw)}")
    if len(raw) > need:
        raise FormatError("trailing bytes after labels")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    pts = body[: n * d].reshape(n, d).astype(np.float64)
    labels = body[n * d :].astype(np.float64)
    return DataSet(pts, labels, unit_norm=bool(flag))


def save_dataset_csv(ds: DataSet, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{k}" for k in range(ds.d)] + ["y"])
        for row, y in zip(ds.points, ds.labels):
            w.writerow([repr(float(v)) for v in row] + [repr(float(y))])


def load_dataset_csv(path) -> DataSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError("empty csv")
    header = rows[0]
    d = len(header) - 1
    if d < 1 or header != [f"x{k}" for k in range(d)] + ["y"]:
        raise FormatError(f"unexpected csv header {header}")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != d + 1:
        raise FormatError("ragged csv rows")
    return DataSet(data[:, :d], data[:, d])


def is_unit_norm(points: np.ndarray, tol: float = 1e-12) -> bool:
    norms = np.sqrt(np.einsum("ij,ij->i", points, points))
    return bool(np.all(np.abs(norms - 1.0) <= tol))


def ceil_pow45(m: int) -> int:
    """Exact ``ceil(m ** 0.8)``: the least c with c**5 >= m**4."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    target = m**4
    c = max(int(math.floor(m**0.8)) - 1, 0)
    while c**5 < target:
        c += 1
    return c
