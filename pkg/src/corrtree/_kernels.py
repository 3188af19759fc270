"""Compiled inner loops.

Every reduction here runs sequentially in ascending index order and none of
them use fastmath, so a sum that skips exact-zero terms reproduces the dense
sum bit for bit.  Tree layout: ``nodes`` has length ``2 * P`` with ``P`` the
smallest power of two >= L; the root is ``nodes[1]``, leaf ``j`` lives at
``nodes[P + j]``, unused leaves and ``nodes[0]`` hold -inf.
"""

import math

import numpy as np
from numba import njit

_NEG_INF = -np.inf


@njit(cache=True)
def dot(a, b):
    s = 0.0
    for k in range(a.shape[0]):
        s += a[k] * b[k]
    return s


@njit(cache=True)
def inner_products(W, X):
    """``G[i, r] = dot(W[r], X[i])``."""
    n = X.shape[0]
    m = W.shape[0]
    G = np.empty((n, m))
    for i in range(n):
        for r in range(m):
            G[i, r] = dot(W[r], X[i])
    return G


@njit(cache=True)
def build(nodes, values, P):
    L = values.shape[0]
    nodes[0] = _NEG_INF
    for j in range(P):
        nodes[P + j] = values[j] if j < L else _NEG_INF
    for p in range(P - 1, 0, -1):
        a = nodes[2 * p]
        b = nodes[2 * p + 1]
        nodes[p] = a if a >= b else b


@njit(cache=True)
def update_leaf(nodes, P, j, v):
    """Set leaf ``j`` and recompute every ancestor from its two children."""
    p = P + j
    nodes[p] = v
    writes = 1
    p >>= 1
    while p >= 1:
        a = nodes[2 * p]
        b = nodes[2 * p + 1]
        nodes[p] = a if a >= b else b
        writes += 1
        p >>= 1
    return writes


@njit(cache=True)
def _passes(v, tau, strict):
    if strict:
        return v > tau
    return v >= tau


@njit(cache=True)
def query(nodes, P, L, tau, strict, limit, out):
    """Depth-first threshold report, leftmost first.

    Writes matching leaf indices into ``out`` in ascending order.  When
    ``limit >= 0`` the walk stops as soon as ``limit + 1`` leaves are found.
    Returns ``(count, visited)``.
    """
    visited = 1
    count = 0
    if not _passes(nodes[1], tau, strict):
        return count, visited
    stack = np.empty(2 * (int(math.log2(P)) + 2), dtype=np.int64)
    top = 0
    stack[top] = 1
    top += 1
    while top > 0:
        top -= 1
        p = stack[top]
        if p >= P:
            j = p - P
            if j < L:
                out[count] = j
                count += 1
                if limit >= 0 and count > limit:
                    return count, visited
            continue
        left = 2 * p
        right = left + 1
        visited += 2
        if _passes(nodes[right], tau, strict):
            stack[top] = right
            top += 1
        if _passes(nodes[left], tau, strict):
            stack[top] = left
            top += 1
    return count, visited


@njit(cache=True)
def build_rows(trees, values, P):
    for i in range(values.shape[0]):
        build(trees[i], values[i], P)


@njit(cache=True)
def dtree_update(trees, X, z, r, P):
    writes = 0
    for i in range(X.shape[0]):
        writes += update_leaf(trees[i], P, r, dot(z, X[i]))
    return writes


@njit(cache=True)
def dtree_update_many(trees, X, W, rs, P):
    writes = 0
    for c in range(rs.shape[0]):
        writes += dtree_update(trees, X, W[rs[c]], rs[c], P)
    return writes


@njit(cache=True)
def wtree_rebuild(tree, X, z, P):
    n = X.shape[0]
    u = np.empty(n)
    for i in range(n):
        u[i] = dot(z, X[i])
    build(tree, u, P)


@njit(cache=True)
def dense_forward(W, a, X, b):
    """Predictions over every neuron plus the n x m firing mask."""
    n = X.shape[0]
    m = W.shape[0]
    root_m = math.sqrt(m)
    u = np.empty(n)
    fire = np.zeros((n, m), dtype=np.bool_)
    for i in range(n):
        s = 0.0
        for r in range(m):
            z = dot(W[r], X[i])
            act = z - b
            if act > 0.0:
                fire[i, r] = True
            else:
                act = 0.0
            s += a[r] * act
        u[i] = s / root_m
    return u, fire


@njit(cache=True)
def dense_gradient(W, a, X, residual, b):
    """Column r of the gradient, stored as row r of an m x d array."""
    n, d = X.shape
    m = W.shape[0]
    root_m = math.sqrt(m)
    G = np.empty((m, d))
    acc = np.empty(d)
    for r in range(m):
        acc[:] = 0.0
        for i in range(n):
            ind = 1.0 if dot(W[r], X[i]) > b else 0.0
            e = residual[i]
            for k in range(d):
                acc[k] += e * X[i, k] * ind
        coef = a[r] / root_m
        for k in range(d):
            G[r, k] = coef * acc[k]
    return G


@njit(cache=True)
def sparse_forward(W, a, X, b, indptr, indices):
    n = X.shape[0]
    root_m = math.sqrt(W.shape[0])
    u = np.empty(n)
    for i in range(n):
        s = 0.0
        for q in range(indptr[i], indptr[i + 1]):
            r = indices[q]
            s += a[r] * (dot(W[r], X[i]) - b)
        u[i] = s / root_m
    return u


@njit(cache=True)
def sparse_gradient(G, a, X, residual, indptr, indices, columns):
    """Write gradient rows for ``columns`` into the m x d buffer ``G``.

    ``columns`` must contain every neuron listed in the fire sets; rows
    outside it are never read or written.
    """
    n, d = X.shape
    root_m = math.sqrt(G.shape[0])
    for c in range(columns.shape[0]):
        G[columns[c], :] = 0.0
    for i in range(n):
        e = residual[i]
        for q in range(indptr[i], indptr[i + 1]):
            r = indices[q]
            for k in range(d):
                G[r, k] += e * X[i, k]
    for c in range(columns.shape[0]):
        r = columns[c]
        coef = a[r] / root_m
        for k in range(d):
            G[r, k] = coef * G[r, k]


@njit(cache=True)
def apply_step(W, G, eta, columns):
    for c in range(columns.shape[0]):
        r = columns[c]
        for k in range(W.shape[1]):
            W[r, k] = W[r, k] - eta * G[r, k]
