"""Randomized oracle-equivalence suites behind ``corrtree verify``.

Each suite draws ``cases`` random instances, runs the indexed structure and a
brute-force scan side by side and stops at the first disagreement, returning
the offending case so it can be reproduced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from corrtree import _kernels as K
from corrtree.core_types import DataSet, WeightBank
from corrtree.correlation import CorrelationDTree, CorrelationWTree
from corrtree.ddfn import DdfnInstance, ddfn_bruteforce, max_ip_rounds_bound, max_ip_via_ddfn
from corrtree.firesets import fire_sets_bruteforce
from corrtree.maxtree import MaxTree, VisitCounter, scan_above, visit_bound
from corrtree.network import ModelState, gradient

MAX_N, MAX_M, MAX_D = 64, 256, 16


class Mismatch(AssertionError):
    def __init__(self, message: str, case: dict):
        super().__init__(message)
        self.case = case


@dataclass
class SuiteResult:
    name: str
    cases: int
    passed: bool
    message: str = ""
    counterexample: dict = field(default_factory=dict)


def _values(rng: np.random.Generator, size) -> np.ndarray:
    # a third of the draws use a tiny integer alphabet so ties are common
    if rng.random() < 1 / 3:
        return rng.integers(-3, 4, size=size).astype(np.float64)
    return rng.standard_normal(size)


def _threshold(rng: np.random.Generator, values: np.ndarray) -> float:
    pick = rng.random()
    if pick < 0.5 and values.size:
        return float(rng.choice(values.reshape(-1)))
    if pick < 0.55:
        return float(rng.choice([np.inf, -np.inf]))
    return float(rng.normal(0.0, 1.5))


def _check_query(got, want, visited, leaves, case, what):
    if not np.array_equal(got, want):
        raise Mismatch(f"{what}: got {got.tolist()} want {want.tolist()}", case)
    if visited > visit_bound(len(want), leaves):
        raise Mismatch(f"{what}: visited {visited} nodes, bound {visit_bound(len(want), leaves)}", case)


def case_maxtree(rng: np.random.Generator) -> None:
    L = int(rng.integers(1, MAX_M + 1))
    values = _values(rng, L)
    tree = MaxTree.build(values)
    case = {"values": values.tolist()}
    for step in range(6):
        if step % 2:
            i = int(rng.integers(L))
            v = float(_values(rng, 1)[0])
            tree.update_leaf(i, v)
            values[i] = v
            case.setdefault("updates", []).append((i, v))
            if not tree.check_heap():
                raise Mismatch("heap property broken after update", case)
        tau = _threshold(rng, values)
        strict = bool(rng.integers(2))
        case["query"] = (tau, strict)
        c = VisitCounter()
        got = tree.query_above(tau, strict, c)
        _check_query(got, scan_above(values, tau, strict), c.nodes_visited, L, case, "maxtree")
    if tree.root != values.max():
        raise Mismatch("root is not the max leaf", case)


def _instance(rng, max_n=MAX_N, max_m=MAX_M, max_d=MAX_D):
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    d = int(rng.integers(1, max_d + 1))
    X = _values(rng, (n, d))
    W = _values(rng, (m, d))
    return X, W


def _correlation_case(rng, kind: str) -> None:
    X, W = _instance(rng)
    n, m, d = X.shape[0], W.shape[0], X.shape[1]
    cls = CorrelationDTree if kind == "dtree" else CorrelationWTree
    t = cls(WeightBank(W), DataSet(X, np.zeros(n)))
    case = {"kind": kind, "X": X.tolist(), "W0": W.tolist(), "ops": []}
    for _ in range(8):
        if rng.random() < 0.5:
            r = int(rng.integers(m))
            z = _values(rng, d)
            t.update(z, r)
            W[r] = z
            case["ops"].append(("update", r, z.tolist()))
        G = K.inner_products(W, X)
        tau = _threshold(rng, G)
        strict = bool(rng.integers(2))
        c = VisitCounter()
        if kind == "dtree":
            i = int(rng.integers(n))
            got = t.query(i, tau, strict, c)
            want = scan_above(G[i], tau, strict)
            leaves = m
        else:
            r = int(rng.integers(m))
            i = r
            got = t.query(r, tau, strict, c)
            want = scan_above(G[:, r], tau, strict)
            leaves = n
        case["ops"].append(("query", i, tau, strict))
        _check_query(got, want, c.nodes_visited, leaves, case, kind)
    if not t.check():
        raise Mismatch(f"{kind} leaves diverged from recomputed inner products", case)


def case_dtree(rng) -> None:
    _correlation_case(rng, "dtree")


def case_wtree(rng) -> None:
    _correlation_case(rng, "wtree")


def case_ddfn(rng) -> None:
    n = int(rng.integers(1, MAX_N + 1))
    m = int(rng.integers(1, MAX_M + 1))
    d = int(rng.integers(1, MAX_D + 1))
    X = rng.integers(-3, 4, size=(n, d)).astype(np.float64)
    Y = rng.integers(-3, 4, size=(m, d)).astype(np.float64)
    # thresholds drawn from the actual products so |Q| lands on both sides of the cap
    b = float(rng.choice((X @ Y.T).ravel())) if rng.random() < 0.9 else float(rng.choice([np.inf, -np.inf]))
    inst = DdfnInstance(X, Y, b)
    case = {"X": X.tolist(), "Y": Y.tolist(), "b": b, "ops": []}
    for _ in range(5):
        if rng.random() < 0.6:
            j = int(rng.integers(m))
            z = rng.integers(-3, 4, size=d).astype(np.float64)
            inst.update(j, z)
            Y[j] = z
            case["ops"].append((j, z.tolist()))
        want = ddfn_bruteforce(X, Y, b)
        got = inst.query()
        if len(want) > inst.cap:
            if not got.overflow:
                raise Mismatch(f"|Q|={len(want)} > cap={inst.cap} but no overflow", case)
        elif got.overflow or not np.array_equal(got.pairs, want):
            raise Mismatch(f"ddfn query mismatch (|Q|={len(want)}, cap={inst.cap})", case)


def case_max_ip(rng) -> None:
    n = int(rng.integers(1, 33))
    d = int(rng.integers(1, 9))
    B = int(rng.integers(0, 11))
    X = rng.integers(-B, B + 1, size=(n, d))
    Y = rng.integers(-B, B + 1, size=(n, d))
    want = int((X @ Y.T).max())
    got, rounds = max_ip_via_ddfn(X, Y, B, return_rounds=True)
    case = {"X": X.tolist(), "Y": Y.tolist(), "B": B}
    if got != want:
        raise Mismatch(f"max-IP {got} != brute force {want}", case)
    if rounds > max_ip_rounds_bound(d, B):
        raise Mismatch(f"{rounds} rounds exceeds {max_ip_rounds_bound(d, B)}", case)


def case_gradient(rng) -> None:
    n = int(rng.integers(1, 17))
    m = int(rng.integers(1, 129))
    d = int(rng.integers(1, 9))
    X = rng.uniform(-1, 1, size=(n, d))
    W = rng.uniform(-1, 1, size=(m, d))
    a = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    y = rng.uniform(-1, 1, size=n)
    b = float(rng.uniform(0, 0.5))
    model = ModelState(WeightBank(W, a), b)
    data = DataSet(X, y)
    dense = gradient(model, data)
    sparse = gradient(model, data, fire_sets_bruteforce(model.weights, data, b))
    # signed zeros compare equal: an all-zero column may carry the sign of a_r
    if not np.array_equal(dense, sparse):
        case = {"X": X.tolist(), "W": W.tolist(), "a": a.tolist(), "y": y.tolist(), "b": b}
        raise Mismatch("sparse gradient differs from dense gradient", case)


SUITES: dict[str, Callable[[np.random.Generator], None]] = {
    "maxtree": case_maxtree,
    "dtree": case_dtree,
    "wtree": case_wtree,
    "ddfn": case_ddfn,
    "max_ip": case_max_ip,
    "gradient": case_gradient,
}


def run_suite(name: str, cases: int, seed: int) -> SuiteResult:
    fn = SUITES[name]
    root = np.random.SeedSequence([seed, list(SUITES).index(name)])
    for k, child in enumerate(root.spawn(cases)):
        try:
            fn(np.random.default_rng(child))
        except Mismatch as exc:
            return SuiteResult(name, k + 1, False, str(exc), {"case_index": k, **exc.case})
    return SuiteResult(name, cases, True)


def run_all(cases: int, seed: int, names=None) -> list[SuiteResult]:
    return [run_suite(name, cases, seed) for name in (names or SUITES)]
