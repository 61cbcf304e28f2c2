"""Estimation and sampling for arbitrary nonnegative matrices and weight vectors.

Two simulated oracles reduce the general problem to the symmetric all-ones
one.  The weighted view serves ``C = diag(x) A diag(y)``, with one base
weighted query per C query.  The symmetrized view serves ``D = C + Cᵀ``, with
one row plus one column query on the inner oracle per D query.  The total
mass of ``D`` is ``2 xᵀAy``.
"""

from __future__ import annotations

import numpy as np

from .bfe import Estimate, bfe
from .config import Constants
from .errors import DimensionError, ZeroMass
from .matrix import BitRange, WeightVector, check_overflow
from .oracle import QueryCounter
from .randomness import as_random_source
from .regr import EntrySample
from .sau import SampleBatch, SauConfig, prepare_sau, sau, sau_many

# Rows materialized at once when a simulated oracle computes row totals.
_CELLS = 1 << 22


class SimulatedOracle:
    """Oracle over a matrix derived from an inner oracle.

    Attributes:
        inner: the oracle being wrapped; it is charged for every query served.
        mode: ``"symmetrize"`` or ``"weighted"``.
        counter: queries answered by this view.
    """

    def __init__(self, inner, mode: str, rho: int, x: np.ndarray | None = None, y: np.ndarray | None = None):
        if mode not in ("symmetrize", "weighted"):
            raise ValueError(f"unknown mode {mode!r}")
        self.inner = inner
        self.mode = mode
        self.n = inner.n
        self.rho = int(rho)
        self.x = x
        self.y = y
        self.counter = QueryCounter()

    def __repr__(self):
        return f"SimulatedOracle(mode={self.mode}, n={self.n}, rho={self.rho}, counter={self.counter})"

    @property
    def base(self):
        """The underlying preprocessed oracle."""
        o = self.inner
        while isinstance(o, SimulatedOracle):
            o = o.inner
        return o

    def read_counter(self) -> QueryCounter:
        return self.counter.snapshot()

    def reset_counter(self) -> None:
        self.counter = QueryCounter()

    def session(self) -> "SimulatedOracle":
        """Same view over a fresh session of the inner oracle."""
        return SimulatedOracle(self.inner.session(), self.mode, self.rho, self.x, self.y)

    def _charge(self, rows: int = 0, cols: int = 0) -> None:
        self.counter.row_queries += int(rows)
        self.counter.col_queries += int(cols)
        if self.mode == "symmetrize":
            both = int(rows) + int(cols)
            self.inner._charge(rows=both, cols=both)
        else:
            self.inner._charge(rows=rows, cols=cols)

    # -- queries

    def _index(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"index {i} out of range for n={self.n}")
        return int(i)

    def row_ip_weighted(self, i: int, v) -> int:
        i = self._index(i)
        v = v.values if isinstance(v, WeightVector) else np.asarray(v, dtype=np.int64)
        if v.shape != (self.n,):
            raise DimensionError(f"query vector of shape {v.shape} against n={self.n}")
        self.counter.row_queries += 1
        if self.mode == "symmetrize":
            return self.inner.row_ip_weighted(i, v) + self.inner.col_ip_weighted(i, v)
        return self.inner.row_ip_weighted(i, self.x[i] * v * self.y)

    def col_ip_weighted(self, j: int, v) -> int:
        j = self._index(j)
        v = v.values if isinstance(v, WeightVector) else np.asarray(v, dtype=np.int64)
        if v.shape != (self.n,):
            raise DimensionError(f"query vector of shape {v.shape} against n={self.n}")
        self.counter.col_queries += 1
        if self.mode == "symmetrize":
            return self.inner.col_ip_weighted(j, v) + self.inner.row_ip_weighted(j, v)
        return self.inner.col_ip_weighted(j, self.x * v * self.y[j])

    def row_ip_range(self, i: int, r: BitRange) -> int:
        i = self._index(i)
        if self.mode == "symmetrize":
            self.counter.row_queries += 1
            return self.inner.row_ip_range(i, r) + self.inner.col_ip_range(i, r)
        return self.row_ip_weighted(i, r.indicator())

    def col_ip_range(self, j: int, r: BitRange) -> int:
        j = self._index(j)
        if self.mode == "symmetrize":
            self.counter.col_queries += 1
            return self.inner.col_ip_range(j, r) + self.inner.row_ip_range(j, r)
        return self.col_ip_weighted(j, r.indicator())

    def row_sum(self, i: int) -> int:
        return self.row_ip_range(i, BitRange.full(self.n))

    def row_sums(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= self.n):
            raise IndexError("row index out of range")
        self._charge(rows=rows.size)
        return self._row_totals(rows)

    # -- uncharged internals

    def _dense_rows(self, rows: np.ndarray) -> np.ndarray:
        if self.mode == "symmetrize":
            return self.inner._dense_rows(rows) + self.inner._dense_cols(rows)
        return self.x[rows, None] * self.inner._dense_rows(rows) * self.y[None, :]

    def _dense_cols(self, cols: np.ndarray) -> np.ndarray:
        if self.mode == "symmetrize":
            return self.inner._dense_cols(cols) + self.inner._dense_rows(cols)
        return self.inner._dense_cols(cols) * self.x[None, :] * self.y[cols, None]

    def _range_table(self, rows: np.ndarray) -> np.ndarray:
        out = np.zeros((len(rows), self.n + 1), dtype=np.int64)
        np.cumsum(self._dense_rows(rows), axis=1, out=out[:, 1:])
        return out

    def _row_totals(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        step = max(1, _CELLS // self.n)
        uniq, inv = np.unique(rows, return_inverse=True)
        totals = np.concatenate(
            [self._dense_rows(uniq[k : k + step]).sum(axis=1) for k in range(0, len(uniq), step)]
            or [np.empty(0, np.int64)]
        )
        return totals[inv.ravel()]


def simulate_symmetric(o) -> SimulatedOracle:
    """View of ``A + Aᵀ`` with entry bound ``2 rho``."""
    return SimulatedOracle(o, "symmetrize", 2 * o.rho)


def simulate_weighted(o, x: WeightVector, y: WeightVector) -> SimulatedOracle:
    """View of ``C`` with ``C_ij = x_i A_ij y_j`` and entry bound ``rho * gamma_x * gamma_y``."""
    if x.n != o.n or y.n != o.n:
        raise DimensionError(f"weights of length {x.n}, {y.n} against n={o.n}")
    check_overflow(o.n, o.rho, x.gamma, y.gamma)
    return SimulatedOracle(o, "weighted", o.rho * x.gamma * y.gamma, x.values, y.values)


def _reduced(o, x: WeightVector | None, y: WeightVector | None) -> SimulatedOracle:
    x = x if x is not None else WeightVector.ones(o.n)
    y = y if y is not None else WeightVector.ones(o.n)
    check_overflow(o.n, 2 * o.rho, x.gamma, y.gamma)
    return simulate_symmetric(simulate_weighted(o, x, y))


def bfe_general(o, x, y, epsilon, rng, cfg: Constants | None = None) -> Estimate:
    """Estimate ``xᵀAy`` within ``1 ± epsilon``; ``None`` weights mean all ones.

    Queries in the returned estimate are counted on ``o``.
    """
    start = o.read_counter()
    est = bfe(_reduced(o, x, y), epsilon, rng, cfg)
    est.value = est.value / 2
    est.queries = o.read_counter() - start
    return est


def _orient(o, x: np.ndarray, y: np.ndarray, i: int, j: int, value: int, rng) -> EntrySample:
    """Turn a draw of ``D_ij = C_ij + C_ji`` into an ordered entry of ``A``.

    Queries ``C_ij`` and ``C_ji`` (one base query each) and emits ``(i, j)``
    with probability ``C_ij / (C_ij + C_ji)``.
    """
    cij = o.row_ip_weighted(i, x[i] * BitRange(j, j + 1, o.n).indicator() * y)
    cji = o.row_ip_weighted(j, x[j] * BitRange(i, i + 1, o.n).indicator() * y)
    if cij + cji == 0:
        raise ZeroMass(f"drew ({i}, {j}) with no weighted mass")
    if not rng.bernoulli(cij, cij + cji):
        i, j, cij = j, i, cji
    return EntrySample(i, j, cij // (int(x[i]) * int(y[j])))


def sau_general(o, x, y, epsilon, rng, cfg: Constants | None = None, prepared: SauConfig | None = None) -> EntrySample:
    """Draw ``(i, j, A_ij)`` with probability within ``1 ± epsilon`` of ``x_i A_ij y_j / xᵀAy``.

    Raises:
        AllZeroMatrix, ExhaustedFail: as :func:`~ipq.sau.sau`.
    """
    rng = as_random_source(rng)
    view = _reduced(o, x, y)
    hit = sau(view, epsilon, rng, cfg, prepared)
    weighted = view.inner
    return _orient(o, weighted.x, weighted.y, hit.row, hit.col, hit.value, rng)


def prepare_sau_general(o, x, y, epsilon, rng, cfg: Constants | None = None) -> SauConfig:
    return prepare_sau(_reduced(o, x, y), epsilon, rng, cfg)


def sau_general_many(
    o, x, y, count: int, epsilon, rng, cfg: Constants | None = None, prepared: SauConfig | None = None
) -> SampleBatch:
    """Bulk form of :func:`sau_general`; charges two base queries per orientation."""
    rng = as_random_source(rng)
    view = _reduced(o, x, y)
    batch = sau_many(view, count, epsilon, rng, cfg, prepared)
    xv, yv = view.inner.x, view.inner.y
    i, j = batch.rows, batch.cols
    base = view.base
    a_ij = base._entries_at(i, j)
    a_ji = base._entries_at(j, i)
    cij = xv[i] * a_ij * yv[j]
    cji = xv[j] * a_ji * yv[i]
    o._charge(rows=2 * i.size)
    flip = rng.generator.integers(np.maximum(cij + cji, 1), size=i.size) >= cij
    rows = np.where(flip, j, i)
    cols = np.where(flip, i, j)
    vals = np.where(flip, a_ji, a_ij)
    return SampleBatch(rows, cols, vals, batch.exhausted, batch.attempts, batch.config)


__all__ = [
    "SimulatedOracle",
    "simulate_symmetric",
    "simulate_weighted",
    "bfe_general",
    "sau_general",
    "sau_general_many",
    "prepare_sau_general",
]
