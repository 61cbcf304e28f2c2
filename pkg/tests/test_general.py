from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipq.config import Constants
from ipq.errors import DimensionError
from ipq.general import (
    _orient,
    bfe_general,
    sau_general,
    sau_general_many,
    simulate_symmetric,
    simulate_weighted,
)
from ipq.matrix import BitRange, Matrix, WeightVector, exact_bilinear, weighted_matrix
from ipq.oracle import QueryCounter, preprocess
from ipq.randomness import enumerate_outcomes
from ipq.regr import EntrySample, regr

LIGHT = Constants(c_k=0.05)


def dense(view) -> np.ndarray:
    """Read a simulated matrix cell by cell through range queries."""
    n = view.n
    return np.array([[view.row_ip_range(i, BitRange(j, j + 1, n)) for j in range(n)] for i in range(n)])


def test_symmetrize_examples():
    assert dense(simulate_symmetric(preprocess(Matrix.from_rows([[0, 2], [4, 0]])))).tolist() == [[0, 6], [6, 0]]
    v = simulate_symmetric(preprocess(Matrix.from_rows([[1, 3], [0, 2]])))
    assert v.row_ip_range(0, BitRange(0, 2, 2)) == 5
    assert v.rho == 2 * 3


def test_symmetrize_doubles_symmetric(four):
    assert np.array_equal(dense(simulate_symmetric(preprocess(four))), 2 * four.entries)


def test_weighted_example(two):
    A, x, y = two
    v = simulate_weighted(preprocess(A), x, y)
    assert dense(v).tolist() == [[3, 0], [12, 8]]
    assert v.rho == 4 * 2 * 3


def test_weighted_identity_and_zero_weights(two):
    A, x, y = two
    ones = WeightVector.ones(2)
    v = simulate_weighted(preprocess(A), ones, y)
    assert v.row_ip_range(1, BitRange.full(2)) == preprocess(A).row_ip_weighted(1, y)
    z = simulate_weighted(preprocess(A), WeightVector.from_values([0, 0]), y)
    assert not dense(z).any()
    with pytest.raises(DimensionError):
        simulate_weighted(preprocess(A), WeightVector.ones(3), y)


def test_query_forwarding(two):
    A, x, y = two
    base = preprocess(A)
    sym = simulate_symmetric(simulate_weighted(base, x, y))
    sym.row_ip_range(0, BitRange.full(2))
    sym.col_ip_range(1, BitRange(0, 1, 2))
    assert sym.read_counter() == QueryCounter(1, 1)
    assert sym.inner.read_counter() == QueryCounter(2, 2)
    assert base.read_counter() == QueryCounter(2, 2)
    sym.row_sums([0, 1, 1])
    assert base.read_counter().total == 2 * sym.read_counter().total


@st.composite
def general_cases(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    rho = draw(st.integers(1, 6))
    A = Matrix(n, rho, np.array(draw(st.lists(st.integers(0, rho), min_size=n * n, max_size=n * n))).reshape(n, n))
    x = WeightVector.from_values(draw(st.lists(st.integers(0, 4), min_size=n, max_size=n)), gamma=4)
    y = WeightVector.from_values(draw(st.lists(st.integers(0, 4), min_size=n, max_size=n)), gamma=4)
    return A, x, y


@settings(max_examples=40, deadline=None)
@given(general_cases(), st.data())
def test_every_simulated_query_matches_materialized(case, data):
    A, x, y = case
    n = A.n
    C = weighted_matrix(A, x, y).entries
    D = C + C.T
    assert D.sum() == 2 * exact_bilinear(A, x, y)
    base = preprocess(A)
    w = simulate_weighted(base, x, y)
    s = simulate_symmetric(w)
    i = data.draw(st.integers(0, n - 1))
    lo = data.draw(st.integers(0, n))
    hi = data.draw(st.integers(lo, n))
    r = BitRange(lo, hi, n)
    v = np.array(data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n)))
    assert w.row_ip_range(i, r) == C[i, lo:hi].sum()
    assert w.col_ip_range(i, r) == C[lo:hi, i].sum()
    assert w.row_ip_weighted(i, v) == C[i] @ v
    assert w.col_ip_weighted(i, v) == C[:, i] @ v
    assert s.row_ip_range(i, r) == D[i, lo:hi].sum()
    assert s.col_ip_weighted(i, v) == D[:, i] @ v
    assert np.array_equal(s._range_table(np.arange(n))[:, 1:], np.cumsum(D, axis=1))
    assert np.array_equal(s._row_totals(np.arange(n)), D.sum(axis=1))


def test_bfe_general_fixture(two):
    A, x, y = two
    o = preprocess(A)
    hits = sum(abs(bfe_general(o.session(), x, y, 0.3, s, LIGHT).value - 23) <= Fraction(3, 10) * 23 for s in range(100))
    assert hits >= 90


def test_bfe_general_zero_weights(two):
    A, _, y = two
    est = bfe_general(preprocess(A), WeightVector.from_values([0, 0]), y, 0.25, 0)
    assert est.value == 0


def test_bfe_general_counts_base_queries(four):
    o = preprocess(four)
    est = bfe_general(o, None, None, 0.25, 1, LIGHT)
    assert est.queries == o.read_counter()
    assert est.queries.row_queries == est.queries.col_queries


def test_orientation_coin():
    A = Matrix.from_rows([[0, 2], [4, 0]])
    o = preprocess(A)
    ones = np.ones(2, np.int64)
    law = enumerate_outcomes(lambda rng: _orient(o, ones, ones, 0, 1, 6, rng))
    assert law == {EntrySample(0, 1, 2): Fraction(1, 3), EntrySample(1, 0, 4): Fraction(2, 3)}
    assert o.read_counter().total == 2 * 2


def test_orientation_on_diagonal_is_certain(four):
    o = preprocess(four)
    ones = np.ones(4, np.int64)
    assert enumerate_outcomes(lambda rng: _orient(o, ones, ones, 3, 3, 8, rng)) == {EntrySample(3, 3, 4): 1}


def test_symmetric_input_orientation_is_fair(four):
    o = preprocess(four)
    ones = np.ones(4, np.int64)
    law = enumerate_outcomes(lambda rng: _orient(o, ones, ones, 1, 2, 10, rng))
    assert law == {EntrySample(1, 2, 5): Fraction(1, 2), EntrySample(2, 1, 5): Fraction(1, 2)}


def test_reduced_entry_law_is_exactly_weighted(two):
    """One symmetrized draw followed by orientation yields entry (i, j) with probability ∝ C_ij."""
    A, x, y = two
    o = preprocess(A)
    view = simulate_symmetric(simulate_weighted(o, x, y))

    def once(rng):
        i = rng.below(2)
        hit = regr(view, i, None, rng)
        return _orient(o, x.values, y.values, hit.row, hit.col, hit.value, rng)

    law = enumerate_outcomes(once)
    # rows of D: (6, 12) and (12, 16) so row i is picked w.p. 1/2 and column j ∝ D_ij
    D = np.array([[6, 12], [12, 16]])
    C = np.array([[3, 0], [12, 8]])
    expected = {}
    for i in range(2):
        for j in range(2):
            for a, b in ((i, j), (j, i)):
                if C[a, b]:
                    p = Fraction(1, 2) * Fraction(int(D[i, j]), int(D[i].sum())) * Fraction(int(C[a, b]), int(C[a, b] + C[b, a]))
                    key = EntrySample(a, b, int(A.entries[a, b]))
                    expected[key] = expected.get(key, 0) + p
    assert law == expected


def test_sau_general_outputs_entries_of_a(two):
    A, x, y = two
    o = preprocess(A)
    out = sau_general(o, x, y, 0.25, 3, LIGHT)
    assert out.value == A.entries[out.row, out.col] > 0


def test_sau_general_bulk_law(two):
    A, x, y = two
    o = preprocess(A)
    batch = sau_general_many(o, x, y, 100000, 0.25, 1, LIGHT)
    assert np.array_equal(batch.values, A.entries[batch.rows, batch.cols])
    freq = np.zeros((2, 2))
    np.add.at(freq, (batch.rows, batch.cols), 1)
    freq /= freq.sum()
    target = np.array([[3, 0], [12, 8]]) / 23
    ratio = freq[target > 0] / target[target > 0]
    assert ratio.min() >= 0.75 - 0.05 and ratio.max() <= 1.25 + 0.05
