"""Compiled inner loops for bulk sampling.

The kernels carry their own xorshift64* stream, seeded from the caller's
numpy Generator, and draw exact uniform integers (Lemire's method for
bounds up to 2^32, modulo-with-rejection above).
"""

from __future__ import annotations

import numba
import numpy as np

_MUL = np.uint64(0x2545F4914F6CDD1D)
_LOW32 = np.uint64(0xFFFFFFFF)
_TWO32 = np.uint64(0x100000000)


@numba.njit(inline="always")
def _next(x):
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    return x, x * _MUL


@numba.njit(inline="always")
def _below(x, m):
    """Uniform integer in [0, m) for 1 <= m < 2^63; returns (state, value)."""
    um = np.uint64(m)
    if um <= _TWO32:
        while True:
            x, r = _next(x)
            prod = (r >> np.uint64(32)) * um
            low = prod & _LOW32
            if low < um:
                if low < (_TWO32 - um) % um:
                    continue
            return x, np.int64(prod >> np.uint64(32))
    while True:
        x, r = _next(x)
        if r < (np.uint64(0) - um) % um:
            continue
        return x, np.int64(r % um)


@numba.njit(inline="always")
def _descend_one(P, a, b, m, x):
    """Halve [a, b) until one column is left; returns (state, column, entry, queries)."""
    q = 1
    while b - a > 1:
        mid = a + (b - a + 1) // 2
        left = P[mid] - P[a]
        q += 1
        x, u = _below(x, m)
        if u < left:
            b = mid
            m = left
        else:
            a = mid
            m = m - left
    return x, a, m, q


@numba.njit(cache=True)
def descend(prefix, tbl, lo, hi, seed):
    """Run one binary descent per call.

    Call ``c`` samples a column of prefix row ``tbl[c]`` restricted to
    ``[lo[c], hi[c])`` with probability proportional to its entry.  Returns
    (cols, values, queries); ``cols[c] = -1`` when the range has no mass.
    Queries per call are 1 for the root mass plus 1 per level.
    """
    ncalls = tbl.shape[0]
    cols = np.empty(ncalls, np.int64)
    vals = np.empty(ncalls, np.int64)
    nq = np.empty(ncalls, np.int64)
    x = np.uint64(seed)
    for c in range(ncalls):
        P = prefix[tbl[c]]
        m = P[hi[c]] - P[lo[c]]
        if m <= 0:
            cols[c] = -1
            vals[c] = 0
            nq[c] = 1
            continue
        x, cols[c], vals[c], nq[c] = _descend_one(P, lo[c], hi[c], m, x)
    return cols, vals, nq


@numba.njit(cache=True)
def descend_tally(P, lo, hi, ndraws, seed):
    """``ndraws`` descents on one prefix row.

    Returns (counts per column, total queries, max queries per call).
    """
    counts = np.zeros(P.shape[0] - 1, np.int64)
    total = P[hi] - P[lo]
    if total <= 0:
        return counts, ndraws, 1
    x = np.uint64(seed)
    maxq = 0
    sumq = 0
    for _ in range(ndraws):
        x, col, _m, q = _descend_one(P, lo, hi, total, x)
        counts[col] += 1
        sumq += q
        if q > maxq:
            maxq = q
    return counts, sumq, maxq
