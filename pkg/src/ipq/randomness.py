"""Random sources for the samplers, plus exhaustive enumeration of their randomness.

Every sampler draws randomness only through three calls:

* ``below(n)``        uniform integer in ``[0, n)``
* ``bernoulli(k, d)`` True with probability exactly ``k/d`` (integers)
* ``chance(p)``       True with probability ``p``; exact when ``p`` is a Fraction

:func:`enumerate_outcomes` replays a sampler over every possible sequence of
those calls and returns the exact output law as Fractions.
"""

from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Hashable

import numpy as np

_INT63 = 2**63


class RandomSource:
    """Seeded randomness backed by a numpy ``Generator``.

    Args:
        seed: anything accepted by :func:`numpy.random.default_rng`, or an
            existing ``Generator``.
    """

    def __init__(self, seed=None):
        if isinstance(seed, np.random.Generator):
            self.seed = None
            self.generator = seed
        else:
            self.seed = seed
            self.generator = np.random.default_rng(seed)

    def __repr__(self):
        return f"RandomSource(seed={self.seed!r})"

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        if n <= _INT63:
            return int(self.generator.integers(n))
        return random.Random(int(self.generator.integers(_INT63))).randrange(n)

    def bernoulli(self, num: int, den: int) -> bool:
        if num <= 0:
            return False
        if num >= den:
            return True
        return self.below(den) < num

    def chance(self, p) -> bool:
        if isinstance(p, Rational):
            p = Fraction(p)
            return self.bernoulli(p.numerator, p.denominator)
        return bool(self.generator.random() < p)

    def kernel_seed(self) -> int:
        """A nonzero 63-bit seed for the compiled batch kernels."""
        return int(self.generator.integers(1, _INT63))

    def spawn(self, count: int) -> list["RandomSource"]:
        return [RandomSource(g) for g in self.generator.spawn(count)]


def as_random_source(rng) -> RandomSource:
    if isinstance(rng, RandomSource) or hasattr(rng, "bernoulli"):
        return rng
    return RandomSource(rng)


class _ScriptedRandom:
    """Replays a fixed prefix of choices, then takes the first option at each new decision."""

    def __init__(self, prefix: tuple):
        self.prefix = prefix
        self.taken: list = []
        self.alternatives: list[list] = []
        self.probability = Fraction(1)

    def _decide(self, options: list[tuple[Any, Fraction]]):
        options = [(c, p) for c, p in options if p > 0]
        depth = len(self.taken)
        if depth < len(self.prefix):
            choice = self.prefix[depth]
            prob = dict(options)[choice]
            self.alternatives.append([])
        else:
            choice, prob = options[0]
            self.alternatives.append([c for c, _ in options[1:]])
        self.taken.append(choice)
        self.probability *= prob
        return choice

    def below(self, n: int) -> int:
        q = Fraction(1, n)
        return self._decide([(k, q) for k in range(n)])

    def bernoulli(self, num: int, den: int) -> bool:
        p = min(max(Fraction(num, den), Fraction(0)), Fraction(1))
        return self._decide([(True, p), (False, 1 - p)])

    def chance(self, p) -> bool:
        if not isinstance(p, Rational):
            raise TypeError("exact enumeration needs rational probabilities")
        p = Fraction(p)
        return self.bernoulli(p.numerator, p.denominator)


def enumerate_outcomes(
    fn: Callable[[Any], Hashable], max_paths: int = 1_000_000
) -> dict[Hashable, Fraction]:
    """Exact output law of ``fn(rng)`` over all of its random choices.

    ``fn`` must be deterministic given the values returned by ``rng`` and must
    draw randomness only via ``below``/``bernoulli``/``chance``.
    """
    law: dict[Hashable, Fraction] = defaultdict(Fraction)
    stack: list[tuple] = [()]
    paths = 0
    while stack:
        prefix = stack.pop()
        src = _ScriptedRandom(prefix)
        outcome = fn(src)
        law[outcome] += src.probability
        paths += 1
        if paths > max_paths:
            raise RuntimeError(f"more than {max_paths} random paths")
        for depth in range(len(prefix), len(src.taken)):
            for alt in src.alternatives[depth]:
                stack.append(tuple(src.taken[:depth]) + (alt,))
    total = sum(law.values())
    assert total == 1, f"enumerated probability mass {total} != 1"
    return dict(law)
