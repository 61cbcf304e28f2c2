from __future__ import annotations

import pytest

from ipq.matrix import Matrix, WeightVector

FOUR = [[1, 3, 0, 2], [3, 0, 5, 0], [0, 5, 2, 1], [2, 0, 1, 4]]


@pytest.fixture
def four():
    """Symmetric 4x4 fixture with total mass 29 and row sums (6, 8, 8, 7)."""
    return Matrix.from_rows(FOUR, rho=5)


@pytest.fixture
def two():
    """Asymmetric 2x2 fixture with weights; xᵀAy = 23."""
    A = Matrix.from_rows([[1, 0], [2, 4]], rho=4)
    return A, WeightVector.from_values([1, 2]), WeightVector.from_values([3, 1])


_RESULTS_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's verdict; the summary prints one line per criterion."""
    lines = request.config.stash[_RESULTS_KEY]

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        lines.append((number, f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} | {detail}"))
        print(lines[-1][1])
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_RESULTS_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
