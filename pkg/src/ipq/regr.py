"""Random element of a given row: sample column j of row i with probability A[i, j] / range mass.

The range is halved repeatedly (left half takes the ceiling), descending into
the left half with probability ``left_mass / range_mass``.  Only the left mass
is queried at each level; the right mass is derived.  A call on a range of
length L therefore costs ``1 + ceil(log2 L)`` row queries.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import InvalidRange, ZeroMass
from .matrix import BitRange
from .randomness import as_random_source


class EntrySample(NamedTuple):
    row: int
    col: int
    value: int


def query_budget(length: int) -> int:
    """Documented per-call ceiling, ``2*ceil(log2 L) + 2``."""
    return 2 * max(int(length) - 1, 0).bit_length() + 2


def regr(o, i: int, r: BitRange | None, rng) -> EntrySample:
    """Sample an entry of row ``i`` inside ``r`` proportionally to its value.

    Args:
        o: any oracle exposing ``row_ip_range``.
        i: row index.
        r: column range; ``None`` means the full row.
        rng: a :class:`~ipq.randomness.RandomSource` (or a seed).

    Raises:
        InvalidRange: ``r`` is empty.
        ZeroMass: the row has no mass inside ``r``.
    """
    rng = as_random_source(rng)
    n = o.n
    if r is None:
        r = BitRange.full(n)
    if len(r) == 0:
        raise InvalidRange(f"empty range [{r.lo}, {r.hi})")
    m = o.row_ip_range(i, r)
    if m == 0:
        raise ZeroMass(f"row {i} has zero mass on [{r.lo}, {r.hi})")
    a, b = r.lo, r.hi
    while b - a > 1:
        mid = a + (b - a + 1) // 2
        left = o.row_ip_range(i, BitRange(a, mid, n))
        if rng.bernoulli(left, m):
            b, m = mid, left
        else:
            a, m = mid, m - left
    return EntrySample(int(i), a, m)


def descend_uncharged(o, rows, rng, lo=None, hi=None):
    """Bulk REGR without touching the query counter; ``cols`` is -1 on zero-mass ranges.

    Returns:
        (cols, values, queries) arrays; ``queries[c]`` is what call c would be charged.
    """
    rng = as_random_source(rng)
    rows = np.asarray(rows, dtype=np.int64)
    k = rows.size
    if k == 0:
        empty = np.empty(0, np.int64)
        return empty, empty, empty
    if rows.min() < 0 or rows.max() >= o.n:
        raise IndexError("row index out of range")
    uniq, tbl = np.unique(rows, return_inverse=True)
    prefix = np.ascontiguousarray(o._range_table(uniq), dtype=np.int64)
    lo = np.zeros(k, np.int64) if lo is None else np.broadcast_to(np.asarray(lo, np.int64), (k,)).copy()
    hi = np.full(k, o.n, np.int64) if hi is None else np.broadcast_to(np.asarray(hi, np.int64), (k,)).copy()
    if np.any(lo >= hi) or lo.min() < 0 or hi.max() > o.n:
        raise InvalidRange("every batch range must be nonempty and inside [0, n)")
    return _kernels.descend(prefix, tbl.astype(np.int64).ravel(), lo, hi, rng.kernel_seed())


def regr_batch(o, rows, rng, lo=None, hi=None):
    """Independent REGR calls in bulk, one per entry of ``rows``.

    ``lo``/``hi`` default to the full row.  The oracle is charged exactly what
    the per-call procedure would spend.

    Returns:
        (cols, values, queries) arrays; ``queries[c]`` is the cost of call c.

    Raises:
        ZeroMass: some requested range carries no mass.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols, vals, nq = descend_uncharged(o, rows, rng, lo, hi)
    o._charge(rows=int(nq.sum()))
    if np.any(cols < 0):
        bad = int(rows[np.argmax(cols < 0)])
        raise ZeroMass(f"row {bad} has zero mass on its requested range")
    return cols, vals, nq


def regr_tally(o, i: int, r: BitRange | None, ndraws: int, rng):
    """Tally ``ndraws`` independent REGR calls on one row and range.

    Returns:
        (counts per column, max queries used by a single call).
    """
    rng = as_random_source(rng)
    if r is None:
        r = BitRange.full(o.n)
    if len(r) == 0:
        raise InvalidRange(f"empty range [{r.lo}, {r.hi})")
    if not 0 <= i < o.n:
        raise IndexError(f"index {i} out of range for n={o.n}")
    P = np.ascontiguousarray(o._range_table(np.array([i], dtype=np.int64))[0], dtype=np.int64)
    counts, sumq, maxq = _kernels.descend_tally(P, r.lo, r.hi, int(ndraws), rng.kernel_seed())
    o._charge(rows=int(sumq))
    if P[r.hi] == P[r.lo]:
        raise ZeroMass(f"row {i} has zero mass on [{r.lo}, {r.hi})")
    return counts, int(maxq)
