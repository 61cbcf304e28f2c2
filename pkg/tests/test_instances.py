from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipq.errors import MalformedHeaderError, MalformedLineError, RowCountError
from ipq.instances import (
    GraphInstance,
    dumps_graph,
    gen_graph_family,
    gen_planted,
    gen_random,
    gen_random_symmetric,
    gen_zero,
    graph_to_quadratic,
    load_graph,
    planted_size,
)
from ipq.matrix import dumps_matrix, exact_bilinear


def test_random_symmetric_examples():
    assert exact_bilinear(gen_random_symmetric(8, 3, 0.0, seed=1)) == 0
    assert exact_bilinear(gen_random_symmetric(6, 1, 1.0, seed=1)) == 36
    a = gen_random_symmetric(20, 5, 0.3, seed=4)
    assert dumps_matrix(a) == dumps_matrix(gen_random_symmetric(20, 5, 0.3, seed=4))
    assert a.is_symmetric()


def test_random_asymmetric():
    a = gen_random(30, 4, 0.5, seed=2)
    assert not a.is_symmetric() and a.entries.max() <= 4


def test_planted_examples():
    A = gen_planted(16, 4, 64, seed=0)
    assert exact_bilinear(A) == 64
    rows = np.flatnonzero(A.entries.sum(axis=1))
    assert len(rows) == 4 and np.all(A.entries[np.ix_(rows, rows)] == 4)
    B = gen_planted(16, 4, 4, seed=3)
    (i,) = np.flatnonzero(B.entries.sum(axis=1))
    assert B.entries[i, i] == 4 and exact_bilinear(B) == 4
    assert exact_bilinear(gen_zero(16)) == 0


def test_planted_rejects_infeasible_mass():
    with pytest.raises(ValueError, match="nearest feasible value is 64"):
        planted_size(4, 60)
    with pytest.raises(ValueError):
        gen_planted(3, 1, 16)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 12), st.integers(0, 1000))
def test_planted_mass_exact(rho, side, seed):
    n = max(side, 1) + 3
    assert exact_bilinear(gen_planted(n, rho, rho * side * side, seed)) == rho * side * side


@pytest.mark.parametrize("n, rho", [(64, 2), (256, 3), (100, 5), (144, 1)])
def test_graph_family_closed_forms(n, rho):
    g1 = gen_graph_family(n, rho, "g1", seed=n)
    gr = gen_graph_family(n, rho, "Grho", seed=n)
    assert g1.weighted_edge_sum() == (rho * rho + 2) * n
    assert gr.weighted_edge_sum() == (2 * rho * rho + 1) * n
    for g in (g1, gr):
        assert len(g.edges) == 3 * n
        if rho > 1:
            assert int((g.weights == rho).sum()) == int((g.weights == 1).sum()) == n // 2
        A, f, Q = graph_to_quadratic(g)
        assert A.is_symmetric() and not np.diag(A.entries).any()
        assert exact_bilinear(A, f, f) == 2 * Q


def test_graph_family_examples():
    assert gen_graph_family(64, 2, "g1").weighted_edge_sum() == 384
    assert gen_graph_family(64, 2, "grho").weighted_edge_sum() == 576


@pytest.mark.parametrize("n", [36, 49, 50, 16])
def test_graph_family_constraints(n):
    with pytest.raises(ValueError):
        gen_graph_family(n, 2, "g1")


def test_graph_to_quadratic_examples():
    tri = GraphInstance(3, [(0, 1), (1, 2), (0, 2)], [1, 1, 1])
    A, f, Q = graph_to_quadratic(tri)
    assert Q == 3 and exact_bilinear(A, f, f) == 6
    assert graph_to_quadratic(GraphInstance(2, [(0, 1)], [2, 3]))[2] == 6
    assert graph_to_quadratic(GraphInstance(4, np.empty((0, 2)), [1, 1, 1, 1]))[2] == 0


def test_graph_validation():
    with pytest.raises(ValueError):
        GraphInstance(3, [(0, 0)], [1, 1, 1])
    with pytest.raises(ValueError):
        GraphInstance(3, [(0, 1), (1, 0)], [1, 1, 1])
    with pytest.raises(ValueError):
        GraphInstance(2, [(0, 1)], [0, 1])


def test_graph_file_round_trip():
    g = gen_graph_family(64, 3, "g1", seed=5)
    h = load_graph(dumps_graph(g), None)
    assert np.array_equal(h.edges, g.edges) and h.n == 64
    assert dumps_graph(g).startswith("graph 64 192\n")


@pytest.mark.parametrize(
    "text, error, line",
    [
        ("grph 3 1\n0 1\n", MalformedHeaderError, 1),
        ("graph 3 2\n0 1\n", RowCountError, 3),
        ("graph 3 1\n0 1 2\n", MalformedLineError, 2),
        ("graph 3 1\n0 3\n", MalformedLineError, 2),
    ],
)
def test_graph_parse_errors(text, error, line):
    with pytest.raises(error) as info:
        load_graph(text)
    assert info.value.line == line
