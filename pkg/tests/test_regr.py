from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipq.errors import InvalidRange, ZeroMass
from ipq.matrix import BitRange, Matrix
from ipq.oracle import preprocess
from ipq.randomness import RandomSource, enumerate_outcomes
from ipq.regr import EntrySample, query_budget, regr, regr_batch, regr_tally


def test_row_law_by_enumeration(four):
    o = preprocess(four)
    law = enumerate_outcomes(lambda rng: regr(o, 0, BitRange.full(4), rng))
    assert law == {
        EntrySample(0, 0, 1): Fraction(1, 6),
        EntrySample(0, 1, 3): Fraction(1, 2),
        EntrySample(0, 3, 2): Fraction(1, 3),
    }


def test_singleton_range(four):
    o = preprocess(four)
    assert regr(o, 1, BitRange(2, 3, 4), 0) == EntrySample(1, 2, 5)


def test_zero_mass_and_empty_range(four):
    o = preprocess(four)
    with pytest.raises(ZeroMass):
        regr(o, 1, BitRange(3, 4, 4), 0)
    with pytest.raises(InvalidRange):
        regr(o, 1, BitRange(2, 2, 4), 0)
    with pytest.raises(ZeroMass):
        regr_batch(o, [0, 1], 0, lo=[0, 3], hi=[4, 4])
    with pytest.raises(ZeroMass):
        regr_tally(o, 1, BitRange(3, 4, 4), 10, 0)


def test_budget_values():
    assert query_budget(16) == 10
    assert query_budget(1) == 2
    assert query_budget(5) == 8


def test_deterministic_given_seed(four):
    o = preprocess(four)
    a = [regr(o, 2, None, RandomSource(9)) for _ in range(3)]
    b = [regr(o, 2, None, RandomSource(9)) for _ in range(3)]
    assert a == b
    c1, _, _ = regr_batch(o, [0, 1, 2, 3] * 5, RandomSource(4))
    c2, _, _ = regr_batch(o, [0, 1, 2, 3] * 5, RandomSource(4))
    assert np.array_equal(c1, c2)


@st.composite
def row_and_range(draw):
    n = draw(st.integers(1, 16))
    row = draw(st.lists(st.integers(0, 6), min_size=n, max_size=n))
    lo = draw(st.integers(0, n - 1))
    hi = draw(st.integers(lo + 1, n))
    return np.array(row), lo, hi


@settings(max_examples=60, deadline=None)
@given(row_and_range())
def test_exact_law_and_budget_for_any_range(case):
    row, lo, hi = case
    n = len(row)
    A = Matrix(n, 6, np.vstack([row] + [np.zeros(n, np.int64)] * (n - 1)))
    o = preprocess(A)
    r = BitRange(lo, hi, n)
    mass = int(row[lo:hi].sum())
    if mass == 0:
        with pytest.raises(ZeroMass):
            regr(o, 0, r, 0)
        return
    costs = []

    def run(rng):
        before = o.read_counter().total
        out = regr(o, 0, r, rng)
        costs.append(o.read_counter().total - before)
        return out

    law = enumerate_outcomes(run)
    expected = {EntrySample(0, j, int(row[j])): Fraction(int(row[j]), mass) for j in range(lo, hi) if row[j]}
    assert law == expected
    assert max(costs) <= query_budget(hi - lo)


@settings(max_examples=30, deadline=None)
@given(row_and_range(), st.integers(0, 2**32))
def test_batch_support_and_charging(case, seed):
    row, lo, hi = case
    n = len(row)
    if row[lo:hi].sum() == 0:
        return
    A = Matrix(n, 6, np.vstack([row] + [np.zeros(n, np.int64)] * (n - 1)))
    o = preprocess(A)
    cols, vals, nq = regr_batch(o, np.zeros(200, np.int64), seed, lo=lo, hi=hi)
    assert np.all((cols >= lo) & (cols < hi))
    assert np.array_equal(vals, row[cols]) and np.all(vals > 0)
    assert nq.max() <= query_budget(hi - lo)
    assert o.read_counter().row_queries == nq.sum()


def test_tally_matches_law(four):
    o = preprocess(four)
    counts, maxq = regr_tally(o, 0, None, 60000, 1)
    freq = counts / counts.sum()
    assert np.abs(freq - np.array([1, 3, 0, 2]) / 6).sum() / 2 < 0.01
    assert maxq <= query_budget(4)
    assert counts[2] == 0
