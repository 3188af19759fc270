import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrtree.maxtree import MaxTree, VisitCounter, scan_above, tree_depth, visit_bound


def test_build_root():
    assert MaxTree.build([5, 1, 3, 9]).root == 9


def test_single_leaf():
    t = MaxTree.build([7])
    assert t.root == 7
    assert t.depth == 0
    assert t.query_above(6).tolist() == [0]


def test_odd_leaf_count():
    t = MaxTree.build([2, 8, 6])
    assert t.root == 8
    assert t.check_heap()
    assert t.leaves().tolist() == [2, 8, 6]
    assert t.query_above(-np.inf, strict=False).tolist() == [0, 1, 2]


def test_empty_rejected():
    with pytest.raises(ValueError):
        MaxTree.build([])


def test_decrease_lowers_root():
    t = MaxTree.build([5, 1, 3, 9])
    t.update_leaf(3, 2)
    assert t.root == 5
    assert t.check_heap()


def test_increase_raises_root():
    t = MaxTree.build([5, 1, 3, 9])
    t.update_leaf(0, 11)
    assert t.root == 11


def test_update_same_value_is_noop():
    t = MaxTree.build([5, 1, 3, 9])
    before = t.nodes.copy()
    t.update_leaf(2, 3)
    assert np.array_equal(before, t.nodes)


def test_update_out_of_range():
    t = MaxTree.build([1, 2])
    with pytest.raises(IndexError):
        t.update_leaf(2, 0.0)
    with pytest.raises(IndexError):
        t.update_leaf(-1, 0.0)


def test_update_path_writes():
    for L in (1, 2, 3, 4, 5, 100, 256, 257):
        t = MaxTree.build(np.arange(L, dtype=float))
        assert t.update_leaf(L - 1, -5.0) == tree_depth(L) + 1


def test_query_examples():
    t = MaxTree.build([5, 1, 3, 9])
    assert t.query_above(4, strict=True).tolist() == [0, 3]
    c = VisitCounter()
    assert t.query_above(9, strict=True, counter=c).tolist() == []
    assert c.nodes_visited == 1
    assert t.query_above(9, strict=False).tolist() == [3]


def test_query_limit_stops_early():
    t = MaxTree.build(np.arange(64, dtype=float))
    c = VisitCounter()
    got = t.query_above(-1.0, counter=c, limit=3)
    assert got.tolist() == [0, 1, 2, 3]
    assert c.nodes_visited < 64


def test_counter_accumulates():
    t = MaxTree.build([1.0, 2.0])
    c = VisitCounter()
    t.query_above(0.0, counter=c)
    first = c.nodes_visited
    t.query_above(0.0, counter=c)
    assert c.nodes_visited == 2 * first


values = st.lists(
    st.one_of(st.integers(-3, 3).map(float), st.floats(-10, 10, allow_nan=False)),
    min_size=1,
    max_size=80,
)


@settings(max_examples=300)
@given(values, st.floats(-12, 12, allow_nan=False), st.booleans())
def test_query_matches_scan(vals, tau, strict):
    t = MaxTree.build(vals)
    c = VisitCounter()
    got = t.query_above(tau, strict, c)
    want = scan_above(vals, tau, strict)
    assert got.tolist() == want.tolist()
    assert c.nodes_visited <= visit_bound(len(want), len(vals))


@settings(max_examples=200)
@given(
    values,
    st.lists(st.tuples(st.integers(0, 79), st.floats(-10, 10, allow_nan=False)), max_size=30),
)
def test_heap_property_after_updates(vals, updates):
    t = MaxTree.build(vals)
    ref = list(vals)
    for i, v in updates:
        i %= len(ref)
        t.update_leaf(i, v)
        ref[i] = v
        assert t.check_heap()
        assert t.root == max(ref)
    assert t.leaves().tolist() == ref


def test_thousand_random_cases(rng):
    for _ in range(1000):
        L = int(rng.integers(1, 200))
        vals = rng.standard_normal(L) if rng.random() < 0.5 else rng.integers(-2, 3, L).astype(float)
        tau = float(rng.choice(vals)) if rng.random() < 0.5 else float(rng.normal())
        strict = bool(rng.integers(2))
        t = MaxTree.build(vals)
        c = VisitCounter()
        got = t.query_above(tau, strict, c)
        want = scan_above(vals, tau, strict)
        assert np.array_equal(got, want)
        assert c.nodes_visited <= visit_bound(len(want), L)
