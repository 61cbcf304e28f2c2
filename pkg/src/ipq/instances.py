"""Instance generators: random matrices, planted blocks, and weighted graph families."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import IO, Union

import numpy as np

from .errors import MalformedHeaderError, MalformedLineError, RowCountError
from .matrix import Matrix, WeightVector


@dataclass(frozen=True, eq=False)
class GraphInstance:
    """Simple undirected graph with positive integer vertex weights.

    Attributes:
        n: vertex count.
        edges: ``(E, 2)`` array of pairs ``u < v``, sorted, without repeats.
        weights: per-vertex weights ``f``, each in ``1..gamma``.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        e = np.sort(e, axis=1)
        if e.size:
            if e.min() < 0 or e.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
        e = e[np.lexsort((e[:, 1], e[:, 0]))]
        if len(e) > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            raise ValueError("duplicate edge")
        f = np.asarray(self.weights, dtype=np.int64)
        if f.shape != (self.n,):
            raise ValueError("need one weight per vertex")
        if f.size and f.min() < 1:
            raise ValueError("vertex weights must be positive")
        e.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "weights", f)

    @property
    def gamma(self) -> int:
        return max(int(self.weights.max(initial=1)), 1)

    def weighted_edge_sum(self) -> int:
        """``Q``: sum over edges of ``f(u) * f(v)``."""
        f = self.weights
        return int(np.sum(f[self.edges[:, 0]] * f[self.edges[:, 1]]))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def gen_random_symmetric(n: int, rho: int, p: float, seed=None) -> Matrix:
    """Symmetric matrix; each cell on or above the diagonal is nonzero with probability ``p``,
    uniform in ``1..rho`` when it is, and mirrored below."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    g = _rng(seed)
    vals = g.integers(1, rho + 1, size=(n, n))
    mask = g.random((n, n)) < p
    upper = np.triu(np.where(mask, vals, 0))
    return Matrix(n, rho, upper + np.triu(upper, 1).T)


def gen_random(n: int, rho: int, p: float, seed=None) -> Matrix:
    """Matrix with independent cells: nonzero with probability ``p``, uniform in ``1..rho``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    g = _rng(seed)
    vals = g.integers(1, rho + 1, size=(n, n))
    return Matrix(n, rho, np.where(g.random((n, n)) < p, vals, 0))


def gen_zero(n: int, rho: int = 1) -> Matrix:
    return Matrix(n, rho, np.zeros((n, n), dtype=np.int64))


def planted_size(rho: int, m_target: int) -> int:
    """Side of the planted block, ``sqrt(m_target / rho)``; raises if that is not an integer."""
    if m_target < 0 or rho < 1:
        raise ValueError("need m_target >= 0 and rho >= 1")
    q, r = divmod(m_target, rho)
    s = math.isqrt(q)
    if r or s * s != q:
        lo, hi = rho * s * s, rho * (s + 1) ** 2
        nearest = lo if m_target - lo <= hi - m_target else hi
        raise ValueError(
            f"m_target={m_target} is not rho times a perfect square; nearest feasible value is {nearest}"
        )
    return s


def gen_planted(n: int, rho: int, m_target: int, seed=None) -> Matrix:
    """Matrix equal to ``rho`` on ``I x I`` for a random ``I`` of size ``sqrt(m_target/rho)``, zero elsewhere."""
    s = planted_size(rho, m_target)
    if s > n:
        raise ValueError(f"planted block of side {s} does not fit in n={n}")
    idx = _rng(seed).choice(n, size=s, replace=False)
    A = np.zeros((n, n), dtype=np.int64)
    A[np.ix_(idx, idx)] = rho
    return Matrix(n, rho, A)


def gen_graph_family(n: int, rho: int, family: str, seed=None) -> GraphInstance:
    """Three disjoint complete bipartite graphs ``K(s, s)``, ``s = sqrt(n)``, plus isolated vertices.

    Half the vertices get weight 1 and half weight ``rho``.  For family ``"g1"``
    the first two bipartite graphs sit among weight-1 vertices and the third
    among weight-``rho`` vertices, so ``Q = (rho^2 + 2) n``.  Family ``"grho"``
    swaps the roles, giving ``Q = (2 rho^2 + 1) n``.
    """
    family = family.lower()
    if family not in ("g1", "grho"):
        raise ValueError("family must be 'g1' or 'grho'")
    s = math.isqrt(n)
    if n % 2 or n <= 36 or s * s != n:
        raise ValueError("need n even, n > 36 and n a perfect square")
    if rho < 1:
        raise ValueError("rho must be positive")
    g = _rng(seed)
    perm = g.permutation(n)
    light, heavy = perm[: n // 2], perm[n // 2 :]
    weights = np.ones(n, dtype=np.int64)
    weights[heavy] = rho
    two_side, one_side = (light, heavy) if family == "g1" else (heavy, light)
    parts = [two_side[k * s : (k + 1) * s] for k in range(4)]
    parts += [one_side[k * s : (k + 1) * s] for k in range(2)]
    edges = []
    for a, b in ((parts[0], parts[1]), (parts[2], parts[3]), (parts[4], parts[5])):
        edges.append(np.stack(np.meshgrid(a, b, indexing="ij"), axis=-1).reshape(-1, 2))
    return GraphInstance(n, np.concatenate(edges), weights)


def graph_to_quadratic(g: GraphInstance) -> tuple[Matrix, WeightVector, int]:
    """Adjacency matrix, weight vector ``f`` and exact ``Q``; note ``fᵀAf = 2Q``."""
    A = np.zeros((g.n, g.n), dtype=np.int64)
    A[g.edges[:, 0], g.edges[:, 1]] = 1
    A[g.edges[:, 1], g.edges[:, 0]] = 1
    return Matrix(g.n, 1, A), WeightVector(g.n, g.gamma, g.weights), g.weighted_edge_sum()


# -- graph files: "graph <n> <edge_count>" then one "<u> <v>" line per edge


def dumps_graph(g: GraphInstance) -> str:
    lines = [f"graph {g.n} {len(g.edges)}"]
    lines += [f"{u} {v}" for u, v in g.edges.tolist()]
    return "\n".join(lines) + "\n"


def write_graph(g: GraphInstance, path: Union[str, os.PathLike]) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_graph(g))


def load_graph(source: Union[str, bytes, IO], weights: WeightVector | None = None) -> GraphInstance:
    """Parse a graph file; vertex weights default to all ones."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode()
    lines = source.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MalformedHeaderError(1, "empty input")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "graph" or not all(t.isdigit() for t in head[1:]):
        raise MalformedHeaderError(1, "expected 'graph <n> <edge_count>'")
    n, count = int(head[1]), int(head[2])
    if len(lines) - 1 != count:
        raise RowCountError(len(lines) + 1 if len(lines) - 1 < count else count + 2, f"expected {count} edges")
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        toks = line.split()
        if len(toks) != 2 or not all(t.isdigit() for t in toks):
            raise MalformedLineError(lineno, "expected '<u> <v>'")
        u, v = int(toks[0]), int(toks[1])
        if u >= n or v >= n or u == v:
            raise MalformedLineError(lineno, f"invalid edge ({u}, {v})")
        edges.append((u, v))
    f = np.ones(n, dtype=np.int64) if weights is None else weights.values
    if weights is not None and weights.n != n:
        raise ValueError("weight vector length differs from vertex count")
    return GraphInstance(n, np.array(edges, dtype=np.int64).reshape(-1, 2), f)


def read_graph(path: Union[str, os.PathLike], weights: WeightVector | None = None) -> GraphInstance:
    with open(path) as fh:
        return load_graph(fh.read(), weights)
