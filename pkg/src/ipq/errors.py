"""Exception hierarchy shared across the package."""

from __future__ import annotations


class IPQError(Exception):
    """Base class for all errors raised by :mod:`ipq`."""


class DimensionError(IPQError, ValueError):
    """Operands have incompatible dimensions."""


class OverflowGuardError(IPQError, ValueError):
    """The worst-case bilinear value would not fit in a signed 64-bit accumulator."""


class ParseError(IPQError, ValueError):
    """A text input could not be parsed.

    Attributes:
        line: 1-based line number where the problem was detected.
    """

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class MalformedHeaderError(ParseError):
    pass


class EntryBoundError(ParseError):
    pass


class NegativeEntryError(ParseError):
    pass


class RowCountError(ParseError):
    pass


class MalformedLineError(ParseError):
    pass


class InvalidRange(IPQError, ValueError):
    """An empty or out-of-bounds index range was passed where a nonempty one is required."""


class ZeroMass(IPQError, ValueError):
    """The requested row range has inner product zero, so nothing can be sampled from it."""


class AllZeroMatrix(IPQError):
    """The matrix (as estimated) carries no mass, so no entry can be sampled."""


class ExhaustedFail(IPQError):
    """Every attempt in the sampler's attempt budget failed."""

    def __init__(self, attempts: int):
        self.attempts = attempts
        super().__init__(f"all {attempts} sampling attempts failed")
