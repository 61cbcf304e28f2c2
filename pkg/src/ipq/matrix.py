"""Matrix and vector types, brute-force reference computations, and text I/O.

Text formats (ASCII, ``\\n`` terminated, 0-based indices)::

    dense <n> <rho>         sparse <n> <rho>        weights <n> <gamma>
    a00 a01 ... a0(n-1)     <i> <j> <v>             w0
    ...                     ...                     ...

Unlisted sparse entries are zero.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence, Union

import numpy as np

from .errors import (
    DimensionError,
    EntryBoundError,
    MalformedHeaderError,
    MalformedLineError,
    NegativeEntryError,
    OverflowGuardError,
    RowCountError,
)

INT64_MAX = 2**63 - 1

Source = Union[bytes, str, IO[str], IO[bytes]]


def _frozen_int_array(values, shape=None) -> np.ndarray:
    arr = np.array(values, dtype=np.int64, copy=True)
    if shape is not None and arr.shape != shape:
        raise DimensionError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Matrix:
    """Dense n x n matrix with entries in ``0..rho``. Immutable."""

    n: int
    rho: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("n must be at least 1")
        if self.rho < 1 or self.rho > INT64_MAX:
            raise ValueError("rho must be a positive 64-bit integer")
        arr = _frozen_int_array(self.entries, (self.n, self.n))
        if arr.size and arr.min() < 0:
            raise ValueError("matrix entries must be nonnegative")
        if arr.size and arr.max() > self.rho:
            raise ValueError("entry exceeds rho")
        object.__setattr__(self, "entries", arr)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], rho: int | None = None) -> "Matrix":
        arr = np.asarray(rows, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError("matrix must be square")
        if rho is None:
            rho = max(int(arr.max(initial=0)), 1)
        return cls(arr.shape[0], rho, arr)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.entries, self.entries.T))

    def total(self) -> int:
        return int(self.entries.sum())

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.rho == other.rho
            and np.array_equal(self.entries, other.entries)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Vector of n integers in ``0..gamma``."""

    n: int
    gamma: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("n must be at least 1")
        if self.gamma < 1:
            raise ValueError("gamma must be positive")
        arr = _frozen_int_array(self.values, (self.n,))
        if arr.min() < 0:
            raise ValueError("weights must be nonnegative")
        if arr.max() > self.gamma:
            raise ValueError("weight exceeds gamma")
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_values(cls, values: Iterable[int], gamma: int | None = None) -> "WeightVector":
        arr = np.asarray(list(values), dtype=np.int64)
        if gamma is None:
            gamma = max(int(arr.max(initial=0)), 1)
        return cls(arr.shape[0], gamma, arr)

    @classmethod
    def ones(cls, n: int) -> "WeightVector":
        return cls(n, 1, np.ones(n, dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, WeightVector):
            return NotImplemented
        return self.gamma == other.gamma and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class BitRange:
    """The 0/1 vector with ones exactly at positions ``lo..hi-1`` of an n-vector."""

    lo: int
    hi: int
    n: int

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi <= self.n:
            raise ValueError(f"invalid range [{self.lo}, {self.hi}) for n={self.n}")

    @classmethod
    def full(cls, n: int) -> "BitRange":
        return cls(0, n, n)

    def __len__(self) -> int:
        return self.hi - self.lo

    def indicator(self) -> np.ndarray:
        v = np.zeros(self.n, dtype=np.int64)
        v[self.lo : self.hi] = 1
        return v


def check_overflow(n: int, rho: int, gamma1: int = 1, gamma2: int = 1) -> None:
    """Reject inputs whose worst-case bilinear value ``rho*g1*g2*n^2`` exceeds int64."""
    worst = rho * gamma1 * gamma2 * n * n
    if worst > INT64_MAX:
        raise OverflowGuardError(
            f"rho*gamma1*gamma2*n^2 = {worst} does not fit in a 64-bit accumulator"
        )


def exact_bilinear(A: Matrix, x: WeightVector | None = None, y: WeightVector | None = None) -> int:
    """Brute-force ``x^T A y`` over every entry. ``None`` stands for the all-ones vector."""
    x = WeightVector.ones(A.n) if x is None else x
    y = WeightVector.ones(A.n) if y is None else y
    if x.n != A.n or y.n != A.n:
        raise DimensionError(f"vectors of length {x.n}, {y.n} against n={A.n}")
    check_overflow(A.n, A.rho, x.gamma, y.gamma)
    return int(x.values @ (A.entries @ y.values))


def exact_row_sum(A: Matrix, i: int) -> int:
    if not 0 <= i < A.n:
        raise IndexError(f"row {i} out of range for n={A.n}")
    return int(A.entries[i].sum())


def weighted_matrix(A: Matrix, x: WeightVector, y: WeightVector) -> Matrix:
    """Materialize ``C[i, j] = x[i] * A[i, j] * y[j]`` (test oracle for the weighted reduction)."""
    if x.n != A.n or y.n != A.n:
        raise DimensionError("dimension mismatch")
    check_overflow(A.n, A.rho, x.gamma, y.gamma)
    C = x.values[:, None] * A.entries * y.values[None, :]
    return Matrix(A.n, A.rho * x.gamma * y.gamma, C)


# --------------------------------------------------------------------------- I/O


def _text_lines(source: Source) -> list[str]:
    if isinstance(source, bytes):
        text = source.decode("ascii")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("ascii") if isinstance(data, bytes) else data
    lines = text.split("\n")
    while lines and not lines[-1].strip():
        lines.pop()
    return lines


def _ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise MalformedLineError(lineno, f"non-integer token in {line!r}") from None


def _header(lines: list[str], kinds: tuple[str, ...]) -> tuple[str, int, int]:
    if not lines:
        raise MalformedHeaderError(1, "empty input")
    parts = lines[0].split()
    if len(parts) != 3 or parts[0] not in kinds:
        raise MalformedHeaderError(1, f"expected '<{'|'.join(kinds)}> <n> <bound>', got {lines[0]!r}")
    try:
        n, bound = int(parts[1]), int(parts[2])
    except ValueError:
        raise MalformedHeaderError(1, f"non-integer size in header {lines[0]!r}") from None
    if n < 1 or bound < 1:
        raise MalformedHeaderError(1, "n and bound must be positive")
    return parts[0], n, bound


def _check_value(v: int, bound: int, lineno: int, what: str = "rho") -> None:
    if v < 0:
        raise NegativeEntryError(lineno, f"negative entry {v}")
    if v > bound:
        raise EntryBoundError(lineno, f"entry exceeds {what} ({v} > {bound})")


def loads_matrix(text: str | bytes) -> Matrix:
    return load_matrix(text)


def load_matrix(source: Source) -> Matrix:
    """Parse a dense or sparse matrix file.

    Raises:
        MalformedHeaderError, MalformedLineError, EntryBoundError,
        NegativeEntryError, RowCountError: each carries the offending line number.
    """
    lines = _text_lines(source)
    kind, n, rho = _header(lines, ("dense", "sparse"))
    if rho > INT64_MAX:
        raise MalformedHeaderError(1, "rho does not fit in 64 bits")
    entries = np.zeros((n, n), dtype=np.int64)
    body = lines[1:]
    if kind == "dense":
        if len(body) != n:
            # short input: report the first missing line; long input: the first extra one
            lineno = len(lines) + 1 if len(body) < n else n + 2
            raise RowCountError(lineno, f"expected {n} rows, found {len(body)}")
        for r, line in enumerate(body):
            lineno = r + 2
            vals = _ints(line, lineno)
            if len(vals) != n:
                raise MalformedLineError(lineno, f"expected {n} entries, found {len(vals)}")
            for v in vals:
                _check_value(v, rho, lineno)
            entries[r] = vals
    else:
        seen = set()
        for k, line in enumerate(body):
            lineno = k + 2
            if not line.strip():
                continue
            vals = _ints(line, lineno)
            if len(vals) != 3:
                raise MalformedLineError(lineno, "expected '<i> <j> <v>'")
            i, j, v = vals
            if not (0 <= i < n and 0 <= j < n):
                raise MalformedLineError(lineno, f"index ({i}, {j}) out of range")
            if (i, j) in seen:
                raise MalformedLineError(lineno, f"duplicate entry ({i}, {j})")
            seen.add((i, j))
            _check_value(v, rho, lineno)
            entries[i, j] = v
    return Matrix(n, rho, entries)


def read_matrix(path: str | os.PathLike) -> Matrix:
    with open(path, "rb") as fh:
        return load_matrix(fh)


def dumps_matrix(A: Matrix, fmt: str = "dense") -> str:
    buf = io.StringIO()
    if fmt == "dense":
        buf.write(f"dense {A.n} {A.rho}\n")
        for row in A.entries:
            buf.write(" ".join(map(str, row.tolist())))
            buf.write("\n")
    elif fmt == "sparse":
        buf.write(f"sparse {A.n} {A.rho}\n")
        for i, j in zip(*np.nonzero(A.entries)):
            buf.write(f"{i} {j} {A.entries[i, j]}\n")
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")
    return buf.getvalue()


def write_matrix(A: Matrix, path: str | os.PathLike, fmt: str = "dense") -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_matrix(A, fmt))


def load_weights(source: Source) -> WeightVector:
    lines = _text_lines(source)
    _, n, gamma = _header(lines, ("weights",))
    body = lines[1:]
    if len(body) != n:
        lineno = len(lines) + 1 if len(body) < n else n + 2
        raise RowCountError(lineno, f"expected {n} weights, found {len(body)}")
    values = []
    for k, line in enumerate(body):
        lineno = k + 2
        vals = _ints(line, lineno)
        if len(vals) != 1:
            raise MalformedLineError(lineno, "expected one weight per line")
        _check_value(vals[0], gamma, lineno, "gamma")
        values.append(vals[0])
    return WeightVector(n, gamma, values)


def read_weights(path: str | os.PathLike) -> WeightVector:
    with open(path, "rb") as fh:
        return load_weights(fh)


def dumps_weights(w: WeightVector) -> str:
    return f"weights {w.n} {w.gamma}\n" + "".join(f"{v}\n" for v in w.values.tolist())


def write_weights(w: WeightVector, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_weights(w))
