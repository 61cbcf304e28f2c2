"""Estimate the total mass ``1ᵀA1`` of a symmetric nonnegative matrix.

Rows are grouped into geometric buckets by row sum.  A uniform row sample
estimates each bucket's size; buckets with too few sampled rows are treated
as small and dropped, and the mass that large buckets send into small ones is
recovered by following random entries (via REGR) out of the large buckets.

:func:`bfe_with_lower_bound` needs a lower bound on the mass; :func:`bfe`
searches for one by halving from the maximum possible mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .config import Constants
from .oracle import QueryCounter
from .randomness import as_random_source
from .regr import regr_batch

# Rows are drawn and bucketed in blocks of this many samples to bound memory.
_BLOCK = 1 << 20


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**6)
    return Fraction(x)


def bucket_index(d: int, beta) -> int:
    """Bucket ``b`` with ``(1+beta)**(b-1) <= d < (1+beta)**b``; 0 for ``d == 0``.

    Comparisons are exact: ``d`` is tested against exact rational powers.
    """
    d = int(d)
    if d < 0:
        raise ValueError("row sums are nonnegative")
    if d == 0:
        return 0
    base = 1 + _as_fraction(beta)
    if base <= 1:
        raise ValueError("beta must be positive")
    b = int(math.log(d) / math.log(base)) + 1
    while b > 1 and base ** (b - 1) > d:
        b -= 1
    while base**b <= d:
        b += 1
    return b


@lru_cache(maxsize=64)
def _thresholds(beta: Fraction, t: int) -> tuple[np.ndarray, tuple[Fraction, ...]]:
    """Integer lower thresholds ``ceil((1+beta)**(b-1))`` for b = 1..t, and the powers for b = 0..t."""
    base = 1 + beta
    powers = [Fraction(1)]
    for _ in range(t):
        powers.append(powers[-1] * base)
    lower = np.array([-(-p.numerator // p.denominator) for p in powers[:t]], dtype=object)
    # Thresholds beyond int64 can never be reached by a row sum; clip them.
    lower = np.array([min(int(v), np.iinfo(np.int64).max) for v in lower], dtype=np.int64)
    return lower, tuple(powers)


@dataclass(frozen=True)
class BucketConfig:
    """Bucket geometry for one run at a given lower bound ``ell``."""

    n: int
    rho: int
    epsilon: Fraction
    ell: int
    beta: Fraction
    t: int
    theta: float
    classify_threshold: float

    @classmethod
    def build(cls, n: int, rho: int, epsilon, ell: int) -> "BucketConfig":
        eps = _as_fraction(epsilon)
        beta = eps / 8
        base = 1 + beta
        top = max(int(rho) * int(n), 1)
        # Smallest k with base**k >= top, found exactly.
        k = max(0, math.ceil(math.log(top) / math.log(base)) - 1)
        while base**k < top:
            k += 1
        while k > 0 and base ** (k - 1) >= top:
            k -= 1
        t = k + 1
        scale = 1.0 / (t * n)
        theta = scale * math.sqrt(float(eps) / 8 * ell / rho)
        classify = scale * math.sqrt(float(eps) / 6 * ell / rho)
        return cls(n, int(rho), eps, int(ell), beta, t, theta, classify)

    def bucket_of(self, d: np.ndarray) -> np.ndarray:
        """Vectorized exact :func:`bucket_index`."""
        lower, _ = _thresholds(self.beta, self.t)
        return np.searchsorted(lower, np.asarray(d, dtype=np.int64), side="right")

    def upper(self, b: int) -> Fraction:
        """``(1+beta)**b``, the top edge of bucket ``b``."""
        return _thresholds(self.beta, self.t)[1][b]


def sample_count(n: int, rho: int, ell: int, epsilon, c_k: float) -> int:
    """Row-sample count K, at least 1."""
    eps = float(epsilon)
    k = c_k * math.sqrt(rho) * n / math.sqrt(ell) * eps**-4.5 * math.log(rho * n) ** 2 * math.log(1 / eps)
    return max(1, math.ceil(k))


@dataclass
class Estimate:
    """Result of an estimation run.

    Attributes:
        value: the estimate, as an exact rational.
        epsilon: target relative accuracy.
        lower_bound_used: the lower bound ``ell`` the returned phase ran with.
        queries: oracle queries over the whole run.
        seed: seed of the random source, when known.
        trial_meta: sample count, large buckets and their correction terms, phases.
    """

    value: Fraction
    epsilon: Fraction
    lower_bound_used: int
    queries: QueryCounter
    seed: object = None
    trial_meta: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


def _validate_epsilon(epsilon) -> Fraction:
    eps = _as_fraction(epsilon)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    return eps


def bfe_with_lower_bound(o, ell: int, epsilon, rng, cfg: Constants | None = None) -> Estimate:
    """One estimation pass assuming ``1ᵀA1 >= ell``.

    Args:
        o: oracle over a symmetric nonnegative matrix.
        ell: positive lower bound on the total mass.
        epsilon: accuracy in (0, 1/2).
        rng: random source or seed.
        cfg: constants; defaults read the environment.
    """
    cfg = cfg or Constants.from_env()
    rng = as_random_source(rng)
    eps = _validate_epsilon(epsilon)
    if ell < 1:
        raise ValueError("ell must be a positive integer")
    n, rho = o.n, o.rho
    start = o.read_counter()
    bc = BucketConfig.build(n, rho, eps, ell)
    K = sample_count(n, rho, ell, eps, cfg.c_k)
    meta = {"K": K, "t": bc.t, "beta": str(bc.beta), "exact_fallback": False}

    if cfg.exact_fallback and n > 1 and K >= n * math.log(n):
        total = int(o.row_sums(np.arange(n)).sum())
        meta.update(exact_fallback=True, large_buckets=[], alpha={})
        return Estimate(Fraction(total), eps, int(ell), o.read_counter() - start, rng.seed, meta)

    gen = rng.generator
    # Step 1: sample rows, query their sums, bucket them.  Rows are recorded
    # as multiplicities so memory stays O(n) for any K.
    mult = np.zeros(n, dtype=np.int64)
    row_bucket = np.zeros(n, dtype=np.int64)
    remaining = K
    while remaining:
        block = min(remaining, _BLOCK)
        rows = gen.integers(n, size=block)
        b = bc.bucket_of(o.row_sums(rows))
        row_bucket[rows] = b
        mult += np.bincount(rows, minlength=n)
        remaining -= block
    sizes = np.bincount(row_bucket, weights=mult, minlength=bc.t + 1).astype(np.int64)

    # Step 2: buckets whose sampled share clears the threshold are large.
    large = np.zeros(bc.t + 1, dtype=bool)
    large[1:] = sizes[1:] / K >= bc.classify_threshold
    large_ids = np.flatnonzero(large)

    # Step 3: for each large bucket, resample |S_i| members with replacement,
    # follow a random entry of each, and count landings outside large buckets.
    escaped = {}
    for i in large_ids:
        members = np.flatnonzero((row_bucket == i) & (mult > 0))
        cum = np.cumsum(mult[members])
        hits = 0
        left = int(sizes[i])
        while left:
            block = min(left, _BLOCK)
            picks = members[np.searchsorted(cum, gen.integers(cum[-1], size=block), side="right")]
            cols, _, _ = regr_batch(o, picks, rng)
            hits += int(np.count_nonzero(~large[bc.bucket_of(o.row_sums(cols))]))
            left -= block
        escaped[int(i)] = hits

    # Step 4: (1 + alpha_i)|S_i| = |S_i| + hits_i, so the sum stays exact.
    acc = Fraction(0)
    for i in large_ids:
        acc += (int(sizes[i]) + escaped[int(i)]) * bc.upper(int(i))
    value = Fraction(n, K) * acc
    meta["large_buckets"] = [int(i) for i in large_ids]
    meta["alpha"] = {int(i): escaped[int(i)] / int(sizes[i]) for i in large_ids}
    return Estimate(value, eps, int(ell), o.read_counter() - start, rng.seed, meta)


def bfe(o, epsilon, rng, cfg: Constants | None = None) -> Estimate:
    """Estimate ``1ᵀA1`` without a known lower bound.

    Tries ``ell = rho*n^2, rho*n^2/2, ...`` and returns the first estimate that
    is at least its own ``ell``; at ``ell == 1`` the estimate is returned as is.
    """
    cfg = cfg or Constants.from_env()
    rng = as_random_source(rng)
    start = o.read_counter()
    top = int(o.rho) * o.n * o.n
    phases = []
    k = 0
    while True:
        ell = max(1, top >> k)
        est = bfe_with_lower_bound(o, ell, epsilon, rng, cfg)
        phases.append({"ell": ell, "value": float(est.value), "queries": est.queries.total})
        if est.value >= ell or ell == 1 or est.trial_meta["exact_fallback"]:
            break
        k += 1
    est.trial_meta["phases"] = phases
    est.queries = o.read_counter() - start
    est.seed = rng.seed
    return est
