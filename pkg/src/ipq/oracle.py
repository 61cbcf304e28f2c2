"""Inner-product oracle over a hidden matrix.

Preprocessing builds row and column prefix-sum tables, after which any
contiguous-range query is answered with two table lookups.  Every call is
charged exactly one query on the session's :class:`QueryCounter`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, OverflowGuardError
from .matrix import INT64_MAX, BitRange, Matrix, WeightVector


@dataclass
class QueryCounter:
    row_queries: int = 0
    col_queries: int = 0

    @property
    def total(self) -> int:
        return self.row_queries + self.col_queries

    def snapshot(self) -> "QueryCounter":
        return QueryCounter(self.row_queries, self.col_queries)

    def __sub__(self, other: "QueryCounter") -> "QueryCounter":
        return QueryCounter(self.row_queries - other.row_queries, self.col_queries - other.col_queries)

    def as_dict(self) -> dict:
        return {"row": self.row_queries, "col": self.col_queries, "total": self.total}


@dataclass(frozen=True, eq=False)
class _Tables:
    entries: np.ndarray
    # Both tables carry a leading zero column: P[i, k] = sum of the first k entries.
    row_prefix: np.ndarray
    col_prefix: np.ndarray
    rho: int


def _as_weights(v, n: int) -> np.ndarray:
    arr = v.values if isinstance(v, WeightVector) else np.asarray(v, dtype=np.int64)
    if arr.shape != (n,):
        raise DimensionError(f"query vector of shape {arr.shape} against n={n}")
    if arr.size and arr.min() < 0:
        raise ValueError("query vectors must be nonnegative")
    return arr


class PrefixOracle:
    """Query access to a preprocessed matrix.

    The matrix itself is never exposed; callers see it only through the
    ``*_ip_*`` methods.  Use :meth:`session` to get an independent counter
    over the same (immutable, shareable) tables.
    """

    def __init__(self, tables: _Tables, counter: QueryCounter | None = None):
        self._t = tables
        self.n = tables.entries.shape[0]
        self.rho = tables.rho
        self.counter = counter if counter is not None else QueryCounter()

    def __repr__(self):
        return f"PrefixOracle(n={self.n}, rho={self.rho}, counter={self.counter})"

    # -- accounting

    def read_counter(self) -> QueryCounter:
        return self.counter.snapshot()

    def reset_counter(self) -> None:
        self.counter = QueryCounter()

    def session(self) -> "PrefixOracle":
        return PrefixOracle(self._t)

    def _charge(self, rows: int = 0, cols: int = 0) -> None:
        self.counter.row_queries += int(rows)
        self.counter.col_queries += int(cols)

    # -- views of the prefix tables

    @property
    def row_prefix(self) -> np.ndarray:
        """``row_prefix[i, j] = sum(A[i, :j+1])``."""
        return self._t.row_prefix[:, 1:]

    @property
    def col_prefix(self) -> np.ndarray:
        """``col_prefix[j, i] = sum(A[:i+1, j])``."""
        return self._t.col_prefix[:, 1:]

    # -- queries

    def _index(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"index {i} out of range for n={self.n}")
        return int(i)

    def _range(self, r: BitRange) -> BitRange:
        if r.n != self.n:
            raise DimensionError(f"range over n={r.n} against n={self.n}")
        return r

    def row_ip_range(self, i: int, r: BitRange) -> int:
        """``<A[i, :], 1[lo:hi]>``; one row query, empty ranges included."""
        i = self._index(i)
        r = self._range(r)
        self.counter.row_queries += 1
        P = self._t.row_prefix
        return int(P[i, r.hi] - P[i, r.lo])

    def col_ip_range(self, j: int, r: BitRange) -> int:
        j = self._index(j)
        r = self._range(r)
        self.counter.col_queries += 1
        P = self._t.col_prefix
        return int(P[j, r.hi] - P[j, r.lo])

    def row_sum(self, i: int) -> int:
        return self.row_ip_range(i, BitRange.full(self.n))

    def row_ip_weighted(self, i: int, v) -> int:
        """``<A[i, :], v>`` for any nonnegative integer vector; O(n) time, one query."""
        i = self._index(i)
        w = _as_weights(v, self.n)
        self._check_weighted(w)
        self.counter.row_queries += 1
        return int(self._t.entries[i] @ w)

    def col_ip_weighted(self, j: int, v) -> int:
        j = self._index(j)
        w = _as_weights(v, self.n)
        self._check_weighted(w)
        self.counter.col_queries += 1
        return int(self._t.entries[:, j] @ w)

    def _check_weighted(self, w: np.ndarray) -> None:
        if w.size and self.rho * int(w.max()) * self.n > INT64_MAX:
            raise OverflowGuardError("weighted query could overflow a 64-bit accumulator")

    # -- batch forms, charged per element

    def row_sums(self, rows) -> np.ndarray:
        """Row sums for an array of row indices; one row query each."""
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= self.n):
            raise IndexError("row index out of range")
        self.counter.row_queries += rows.size
        return self._t.row_prefix[rows, self.n]

    def row_ip_ranges(self, rows, lo, hi) -> np.ndarray:
        """Vectorized :meth:`row_ip_range` over broadcast index arrays; one row query each."""
        return self._ranges(self._t.row_prefix, rows, lo, hi, row=True)

    def col_ip_ranges(self, cols, lo, hi) -> np.ndarray:
        return self._ranges(self._t.col_prefix, cols, lo, hi, row=False)

    def _ranges(self, P, idx, lo, hi, row: bool) -> np.ndarray:
        idx, lo, hi = np.broadcast_arrays(*(np.asarray(a, dtype=np.int64) for a in (idx, lo, hi)))
        if idx.size:
            if idx.min() < 0 or idx.max() >= self.n:
                raise IndexError("index out of range")
            if lo.min() < 0 or hi.max() > self.n or np.any(lo > hi):
                raise ValueError("ranges must satisfy 0 <= lo <= hi <= n")
        self._charge(rows=idx.size if row else 0, cols=0 if row else idx.size)
        return P[idx, hi] - P[idx, lo]

    # -- uncharged internals for batch kernels; callers charge via _charge

    def _range_table(self, rows: np.ndarray) -> np.ndarray:
        """Prefix rows (with leading zero) for ``rows``."""
        return self._t.row_prefix[rows]

    def _row_totals(self, rows: np.ndarray) -> np.ndarray:
        return self._t.row_prefix[rows, self.n]

    def _dense_rows(self, rows: np.ndarray) -> np.ndarray:
        return self._t.entries[rows]

    def _entries_at(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        return self._t.entries[rows, cols]

    def _dense_cols(self, cols: np.ndarray) -> np.ndarray:
        """``A[:, cols].T``: one output row per requested column."""
        return self._t.entries[:, cols].T


def preprocess(A: Matrix) -> PrefixOracle:
    """Build both prefix tables in O(n^2) and return an oracle with a zeroed counter."""
    n = A.n
    if A.rho * n > INT64_MAX:
        raise OverflowGuardError("row sums could overflow 64 bits")
    row_prefix = np.zeros((n, n + 1), dtype=np.int64)
    np.cumsum(A.entries, axis=1, out=row_prefix[:, 1:])
    col_prefix = np.zeros((n, n + 1), dtype=np.int64)
    np.cumsum(A.entries.T, axis=1, out=col_prefix[:, 1:])
    for arr in (row_prefix, col_prefix):
        arr.setflags(write=False)
    return PrefixOracle(_Tables(A.entries, row_prefix, col_prefix, A.rho))
