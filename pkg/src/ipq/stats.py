"""Distribution comparisons for sampler output."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy import stats as _sps

from .matrix import Matrix, WeightVector


def tv_distance(p, q) -> float:
    """Total variation distance between two laws given as aligned arrays or as dicts."""
    if isinstance(p, dict) or isinstance(q, dict):
        keys = set(p) | set(q)
        return 0.5 * sum(abs(float(p.get(k, 0)) - float(q.get(k, 0))) for k in keys)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p - q).sum())


def chi_square(observed, expected_probs) -> tuple[float, int, float]:
    """Pearson statistic, degrees of freedom and p-value of counts against a law.

    Cells with zero expected probability are left out; any count landing in
    one makes the statistic infinite.
    """
    obs = np.asarray(observed, dtype=float).ravel()
    prob = np.asarray(expected_probs, dtype=float).ravel()
    support = prob > 0
    if np.any(obs[~support] > 0):
        return float("inf"), int(support.sum()) - 1, 0.0
    total = obs.sum()
    exp = prob[support] * total
    stat = float(((obs[support] - exp) ** 2 / exp).sum()) if total else 0.0
    df = max(int(support.sum()) - 1, 0)
    p = float(_sps.chi2.sf(stat, df)) if df else 1.0
    return stat, df, p


def exact_entry_law(A: Matrix, x: WeightVector | None = None, y: WeightVector | None = None) -> dict:
    """``{(i, j): x_i A_ij y_j / xᵀAy}`` over cells with positive weight, as Fractions."""
    xv = np.ones(A.n, np.int64) if x is None else x.values
    yv = np.ones(A.n, np.int64) if y is None else y.values
    W = xv[:, None] * A.entries * yv[None, :]
    total = int(W.sum())
    if total == 0:
        return {}
    rows, cols = np.nonzero(W)
    return {(int(i), int(j)): Fraction(int(W[i, j]), total) for i, j in zip(rows, cols)}


def row_law(A: Matrix, i: int) -> np.ndarray:
    """``A[i, :] / row sum`` as floats; raises on a zero row."""
    row = A.entries[i].astype(float)
    s = row.sum()
    if s == 0:
        raise ValueError(f"row {i} has no mass")
    return row / s
