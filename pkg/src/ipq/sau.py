"""Sample an entry of a symmetric nonnegative matrix with probability close to ``A_ij / 1ᵀA1``.

Rows with sum at most ``tau`` are light, the rest heavy.  A light attempt
picks a uniform row, keeps it with probability ``d/tau`` if light, and returns
a REGR entry of it.  A heavy attempt does the same, then hops along the entry
to its column's row and, if that row is heavy, returns a REGR entry there.
Symmetry makes the hop land on a heavy row ``s`` with probability proportional
to the mass ``s`` sends into light rows, which is nearly all of its mass once
``tau`` is large.  Each attempt flips a fair coin between the two; a call
retries up to ``gamma`` attempts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bfe import _as_fraction, bfe
from .config import Constants
from .errors import AllZeroMatrix, ExhaustedFail
from .oracle import QueryCounter
from .randomness import as_random_source
from .regr import EntrySample, descend_uncharged, regr

_TAU_BITS = 16
# Attempts simulated per round in sau_many.
_ROUND = 1 << 18


@dataclass(frozen=True)
class SauConfig:
    """Parameters shared by every attempt of one sampler.

    Attributes:
        tau: light/heavy threshold, a rational at least ``sqrt(rho * m_hat / epsilon)``.
        m_hat: mass estimate with ``m <= m_hat <= 2m`` (with high probability).
        gamma: attempt budget per call.
        epsilon: target accuracy.
        setup_queries: queries spent estimating ``m_hat``.
    """

    tau: Fraction
    m_hat: Fraction
    gamma: int
    epsilon: Fraction
    setup_queries: QueryCounter


def threshold_for(rho: int, m_hat, epsilon) -> Fraction:
    """Smallest multiple of ``2**-16`` that is at least ``sqrt(rho * m_hat / epsilon)``."""
    x = Fraction(rho) * Fraction(m_hat) / Fraction(epsilon)
    scaled = x * 4**_TAU_BITS
    num = math.isqrt(math.ceil(scaled))
    if num * num < scaled:
        num += 1
    return Fraction(num, 2**_TAU_BITS)


def attempt_budget(n: int, rho: int, m_hat, epsilon, c_gamma: float) -> int:
    eps = float(epsilon)
    g = c_gamma * n * math.sqrt(rho) / ((1 - eps) * math.sqrt(eps * float(m_hat))) * max(1.0, math.log(n))
    return max(1, math.ceil(g))


def prepare_sau(o, epsilon, rng, cfg: Constants | None = None, m_hat=None) -> SauConfig:
    """Estimate ``m_hat`` (unless given) and size ``tau`` and the attempt budget.

    ``m_hat`` is 3/2 of a BFE estimate at accuracy 1/3, which lies in
    ``[m, 2m]`` whenever that estimate is within a factor ``1 ± 1/3``.

    Raises:
        AllZeroMatrix: the mass estimate is zero.
    """
    cfg = cfg or Constants.from_env()
    rng = as_random_source(rng)
    eps = _as_fraction(epsilon)
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    start = o.read_counter()
    if m_hat is None:
        m_hat = Fraction(3, 2) * bfe(o, Fraction(1, 3), rng, cfg).value
    m_hat = Fraction(m_hat)
    if m_hat <= 0:
        raise AllZeroMatrix("mass estimate is zero; nothing to sample")
    tau = threshold_for(o.rho, m_hat, eps)
    gamma = attempt_budget(o.n, o.rho, m_hat, eps, cfg.c_gamma)
    return SauConfig(tau, m_hat, gamma, eps, o.read_counter() - start)


def sample_light(o, tau, rng) -> EntrySample | None:
    """One light attempt; ``None`` on failure."""
    rng = as_random_source(rng)
    tau = Fraction(tau)
    r = rng.below(o.n)
    d = o.row_sum(r)
    if d > tau or not rng.chance(d / tau):
        return None
    return regr(o, r, None, rng)


def sample_heavy(o, tau, m_hat, rng) -> EntrySample | None:
    """One heavy attempt; ``None`` on failure.

    ``m_hat`` does not change the procedure; it only enters the accuracy bound.
    """
    rng = as_random_source(rng)
    tau = Fraction(tau)
    r = rng.below(o.n)
    d = o.row_sum(r)
    if d > tau or not rng.chance(d / tau):
        return None
    hop = regr(o, r, None, rng)
    if o.row_sum(hop.col) <= tau:
        return None
    return regr(o, hop.col, None, rng)


def sau(o, epsilon, rng, cfg: Constants | None = None, prepared: SauConfig | None = None) -> EntrySample:
    """Draw one entry with probability within ``1 ± epsilon`` of ``A_ij / 1ᵀA1``.

    Raises:
        AllZeroMatrix: the matrix has no mass (as far as the estimate can tell).
        ExhaustedFail: every attempt in the budget failed.
    """
    rng = as_random_source(rng)
    if prepared is None:
        prepared = prepare_sau(o, epsilon, rng, cfg)
    for _ in range(prepared.gamma):
        if rng.bernoulli(1, 2):
            out = sample_light(o, prepared.tau, rng)
        else:
            out = sample_heavy(o, prepared.tau, prepared.m_hat, rng)
        if out is not None:
            return out
    raise ExhaustedFail(prepared.gamma)


def _attempt_round(o, tau: Fraction, size: int, rng):
    """Simulate ``size`` independent attempts without charging.

    Returns (success mask, rows, cols, values, queries per attempt).
    """
    gen = rng.generator
    n = o.n
    light = gen.integers(2, size=size) == 1
    r = gen.integers(n, size=size)
    d = o._row_totals(r)
    q = np.ones(size, dtype=np.int64)
    # keep with probability d/tau, exactly: tau = T/D, keep iff U < d*D for U uniform in [0, T)
    keep = (d * tau.denominator <= tau.numerator) & (gen.integers(tau.numerator, size=size) < d * tau.denominator)
    rows = np.full(size, -1, np.int64)
    cols = np.full(size, -1, np.int64)
    vals = np.zeros(size, np.int64)
    ok = np.zeros(size, dtype=bool)

    idx = np.flatnonzero(keep)
    c1, v1, q1 = descend_uncharged(o, r[idx], rng)
    q[idx] += q1
    lt = light[idx]
    li = idx[lt]
    rows[li], cols[li], vals[li], ok[li] = r[li], c1[lt], v1[lt], True

    hi = idx[~lt]
    s = c1[~lt]
    q[hi] += 1
    second = o._row_totals(s) * tau.denominator > tau.numerator
    hi2, s2 = hi[second], s[second]
    c2, v2, q2 = descend_uncharged(o, s2, rng)
    q[hi2] += q2
    rows[hi2], cols[hi2], vals[hi2], ok[hi2] = s2, c2, v2, True
    return ok, rows, cols, vals, q


@dataclass
class SampleBatch:
    """Successful draws from repeated sampler calls.

    Attributes:
        rows, cols, values: one entry per successful call, in call order.
        exhausted: calls that ran out of attempts before succeeding.
        attempts: total attempts across all calls.
        config: the shared sampler parameters.
    """

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    exhausted: int
    attempts: int
    config: SauConfig


def sau_many(
    o,
    count: int,
    epsilon,
    rng,
    cfg: Constants | None = None,
    prepared: SauConfig | None = None,
    max_exhausted: int | None = None,
) -> SampleBatch:
    """Repeat :func:`sau` calls until ``count`` of them succeed.

    Attempts are simulated in bulk; each call consumes attempts in order until
    its first success or until its budget runs out, and the oracle is charged
    exactly for the attempts the calls consume.

    Raises:
        ExhaustedFail: more than ``max_exhausted`` calls (default ``count + 100``) failed.
    """
    rng = as_random_source(rng)
    if prepared is None:
        prepared = prepare_sau(o, epsilon, rng, cfg)
    if max_exhausted is None:
        max_exhausted = count + 100
    gamma, tau = prepared.gamma, prepared.tau
    out_r, out_c, out_v = [], [], []
    got = exhausted = attempts = 0
    run = 0  # failures of the current call carried over from earlier rounds
    while got < count:
        ok, rows, cols, vals, q = _attempt_round(o, tau, _ROUND, rng)
        pos = np.flatnonzero(ok)
        # failures preceding each success; the first also counts the carried run
        gaps = np.diff(np.concatenate(([-1], pos))) - 1
        if gaps.size:
            gaps[0] += run
        burned = gaps // gamma
        take = min(count - got, pos.size)
        if take < count - got:
            used = _ROUND
            run = (run if not pos.size else 0) + _ROUND - 1 - (int(pos[-1]) if pos.size else -1)
            exhausted += run // gamma
            run %= gamma
        else:
            used = int(pos[take - 1]) + 1
            run = 0
        exhausted += int(burned[:take].sum())
        sel = pos[:take]
        out_r.append(rows[sel])
        out_c.append(cols[sel])
        out_v.append(vals[sel])
        o._charge(rows=int(q[:used].sum()))
        attempts += used
        got += take
        if exhausted > max_exhausted:
            raise ExhaustedFail(gamma)
    cat = lambda parts: np.concatenate(parts) if parts else np.empty(0, np.int64)  # noqa: E731
    return SampleBatch(cat(out_r), cat(out_c), cat(out_v), exhausted, attempts, prepared)
