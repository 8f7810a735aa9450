from fractions import Fraction

import pytest

from hypothesis import given
from hypothesis import strategies as st

from graphmc.linalg import RowBasis, SparseVector, as_rational, rank, row_reduce


def dense_rank(rows, ncols):
    """Textbook Gaussian elimination on a dense copy."""
    m = [[Fraction(r.get(j, 0)) for j in range(ncols)] for r in rows]
    rk = 0
    for col in range(ncols):
        piv = next((i for i in range(rk, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        for i in range(len(m)):
            if i != rk and m[i][col]:
                f = m[i][col] / m[rk][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rk])]
        rk += 1
    return rk


entries = st.integers(-3, 3)
sparse_rows = st.lists(st.dictionaries(st.integers(0, 5), entries, max_size=4), max_size=7)


@given(sparse_rows)
def test_rank_matches_dense_elimination(rows):
    assert rank(rows) == dense_rank(rows, 6)


@given(sparse_rows, st.dictionaries(st.integers(0, 5), entries, max_size=4))
def test_membership_agrees_with_rank(rows, vec):
    basis = row_reduce(rows)
    inside, _ = basis.in_span(vec)
    assert inside == (dense_rank(rows + [vec], 6) == dense_rank(rows, 6))


@given(sparse_rows, st.lists(entries, min_size=7, max_size=7))
def test_tracked_combination_reproduces_vector(rows, weights):
    target = {}
    for w, r in zip(weights, rows):
        for k, v in r.items():
            target[k] = target.get(k, 0) + w * v
    basis = row_reduce(rows, track=True)
    ok, coeffs = basis.in_span(target)
    assert ok
    combo = basis.input_combination(coeffs)
    rebuilt = {}
    for idx, c in combo.items():
        for k, v in rows[idx].items():
            rebuilt[k] = rebuilt.get(k, 0) + c * v
    assert {k: v for k, v in rebuilt.items() if v} == {k: v for k, v in target.items() if v}


@given(sparse_rows)
def test_kernel_relations_vanish(rows):
    basis = row_reduce(rows, track=True)
    assert basis.rank + len(basis.kernel) == len(rows)
    for rel in basis.kernel:
        total = {}
        for idx, c in rel.items():
            for k, v in rows[idx].items():
                total[k] = total.get(k, 0) + c * v
        assert not any(total.values())


def test_rows_are_reduced():
    basis = row_reduce([{0: 2, 1: 4}, {1: 1, 2: 1}, {0: 1, 2: -1}])
    for row, pivot in zip(basis.rows, basis.pivots):
        assert row[pivot] == 1
        for other in basis.pivots:
            if other != pivot:
                assert other not in row


def test_sparse_vector_drops_zeros():
    v = SparseVector({"a": 1, "b": 0})
    w = SparseVector({"a": -1})
    assert "b" not in v
    assert not (v + w)
    assert v * 3 == SparseVector({"a": 3})
    assert (v - w)["a"] == 2


def test_as_rational_rejects_floats():
    assert as_rational("3/4") == Fraction(3, 4)
    with pytest.raises(TypeError):
        as_rational(0.5)
