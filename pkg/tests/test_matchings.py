import pytest
import numpy as np
from itertools import permutations
from math import prod

from gbs_certify.errors import DimensionError, ParameterError, SizeLimitError, SymmetryError
from gbs_certify.linalg import random_graph
from gbs_certify.matchings import (
    Graph,
    block_bipartite,
    count_perfect_matchings,
    hafnian,
    iter_perfect_matchings,
    permanent,
)


def _naive_permanent(matrix: np.ndarray) -> complex:
    n = matrix.shape[0]
    return sum(prod(matrix[i, p[i]] for i in range(n)) for p in permutations(range(n)))


def _random_symmetric(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + a.T


@pytest.mark.parametrize("nodes,expected", [(2, 1), (4, 3), (6, 15), (8, 105)])
def test_hafnian_of_complete_graph(nodes, expected):
    k = Graph.complete(nodes).adjacency
    assert hafnian(k) == pytest.approx(expected)
    assert hafnian(k, method="recursive") == pytest.approx(expected)


def test_hafnian_trivial_sizes():
    assert hafnian(np.zeros((0, 0))) == 1.0
    assert hafnian(np.ones((3, 3))) == 0.0
    assert hafnian(np.array([[0.0, 2.5], [2.5, 0.0]])) == pytest.approx(2.5)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_hafnian_methods_agree(n):
    a = _random_symmetric(n, seed=n)
    fast = hafnian(a, method="subsets")
    slow = hafnian(a, method="recursive")
    assert abs(fast - slow) <= 1e-9 * max(1.0, abs(slow)), f"methods disagree for n={n}"


def test_hafnian_four_by_four_formula():
    a = _random_symmetric(4, seed=1)
    expected = a[0, 1] * a[2, 3] + a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2]
    assert hafnian(a) == pytest.approx(expected)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_hafnian_is_invariant_under_relabelling(n):
    rng = np.random.default_rng(50 + n)
    for trial in range(10):
        a = _random_symmetric(n, seed=100 * n + trial)
        p = np.eye(n)[rng.permutation(n)]
        expected = hafnian(a)
        assert abs(hafnian(p @ a @ p.T) - expected) <= 1e-9 * max(1.0, abs(expected))


@pytest.mark.parametrize("n", [4, 6])
def test_hafnian_is_linear_in_each_row_and_column(n):
    rng = np.random.default_rng(70 + n)
    for trial in range(10):
        a = _random_symmetric(n, seed=200 * n + trial)
        i = int(rng.integers(n))
        t = complex(rng.standard_normal(), rng.standard_normal())
        scale = np.ones(n, dtype=complex)
        scale[i] = t
        scaled = a * np.outer(scale, scale)
        expected = t * hafnian(a)
        assert abs(hafnian(scaled) - expected) <= 1e-9 * max(1.0, abs(expected))


def test_hafnian_diagonal_scaling_multiplies_out():
    a = _random_symmetric(6, seed=9)
    d = np.random.default_rng(9).uniform(0.5, 2.0, size=6)
    expected = np.prod(d) * hafnian(a)
    assert abs(hafnian(np.diag(d) @ a @ np.diag(d)) - expected) <= 1e-9 * abs(expected)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_hafnian_counts_perfect_matchings(seed):
    graph = Graph(adjacency=random_graph(8, 0.6, seed=seed).astype(np.int64))
    assert hafnian(graph.adjacency).real == pytest.approx(count_perfect_matchings(graph))


def test_hafnian_rejects_asymmetric():
    with pytest.raises(SymmetryError):
        hafnian(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_hafnian_rejects_unknown_method():
    with pytest.raises(ParameterError):
        hafnian(np.ones((2, 2)), method="guess")


def test_hafnian_size_limit():
    with pytest.raises(SizeLimitError):
        hafnian(np.ones((24, 24)))


def test_iter_perfect_matchings_of_four_cycle():
    cycle = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    matchings = list(iter_perfect_matchings(cycle.adjacency))
    assert matchings == [[(0, 1), (2, 3)], [(0, 3), (1, 2)]]


def test_count_perfect_matchings_odd_graph():
    assert count_perfect_matchings(Graph.complete(5)) == 0


def test_count_perfect_matchings_size_limit():
    with pytest.raises(SizeLimitError):
        count_perfect_matchings(Graph.complete(16))


@pytest.mark.parametrize(
    "edges",
    [[(0, 0)]],
)
def test_graph_rejects_self_loops(edges):
    with pytest.raises(ParameterError):
        Graph.from_edges(3, edges)


def test_graph_rejects_weighted_adjacency():
    with pytest.raises(ParameterError):
        Graph(adjacency=np.array([[0, 2], [2, 0]]))


def test_permanent_small_cases():
    assert permanent(np.zeros((0, 0))) == 1.0
    assert permanent(np.ones((3, 3))) == pytest.approx(6.0)
    assert permanent(np.array([[1.0, 2.0], [3.0, 4.0]])) == pytest.approx(10.0)
    assert permanent(np.eye(5)) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_permanent_matches_naive_sum(n):
    rng = np.random.default_rng(n)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert permanent(a) == pytest.approx(_naive_permanent(a))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_permanent_equals_hafnian_of_block_matrix(n):
    rng = np.random.default_rng(10 + n)
    for _ in range(20):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        per = permanent(a)
        assert abs(hafnian(block_bipartite(a)) - per) <= 1e-9 * max(1.0, abs(per))


def test_permanent_rejects_non_square():
    with pytest.raises(DimensionError):
        permanent(np.ones((2, 3)))


def test_permanent_size_limit():
    with pytest.raises(SizeLimitError):
        permanent(np.ones((21, 21)))
