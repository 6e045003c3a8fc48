"""
Exact hafnian and permanent evaluation, with a perfect-matching enumeration oracle.

The hafnian sums, over every partition of the indices into unordered pairs, the
product of the paired entries; on a 0/1 adjacency matrix it counts perfect
matchings.  The permanent is the hafnian of the bipartite block matrix
``[[0, M], [M^T, 0]]``.
"""

from dataclasses import dataclass
from typing import Iterator

import numba
import numpy as np
import structlog

from .constants import (
    MAX_HAFNIAN_SIZE,
    MAX_MATCHING_ORACLE_NODES,
    MAX_PERMANENT_SIZE,
    SYMMETRY_TOLERANCE,
)
from .errors import DimensionError, ParameterError, SizeLimitError, SymmetryError
from .linalg import check_square, is_symmetric

log = structlog.get_logger(__name__)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph held as its adjacency matrix."""

    adjacency: np.ndarray

    def __post_init__(self):
        adjacency = check_square(self.adjacency, "adjacency")
        if not is_symmetric(adjacency, 1e-12):
            raise SymmetryError("graph adjacency must be symmetric")
        if np.any(np.diagonal(adjacency) != 0):
            raise ParameterError("simple graphs have a zero diagonal")
        if not np.all(np.isin(adjacency, (0, 1))):
            raise ParameterError("simple graphs have 0/1 adjacency entries")

    @property
    def node_count(self) -> int:
        return int(self.adjacency.shape[0])

    @classmethod
    def from_edges(cls, node_count: int, edges) -> "Graph":
        """
        Build a graph from 0-based edge pairs.

        Examples
        --------
        >>> Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)]).node_count
        4
        """
        adjacency = np.zeros((node_count, node_count), dtype=np.int64)
        for i, j in edges:
            if i == j:
                raise ParameterError(f"self-loop on node {i}")
            adjacency[i, j] = adjacency[j, i] = 1
        return cls(adjacency=adjacency)

    @classmethod
    def complete(cls, node_count: int) -> "Graph":
        return cls(adjacency=np.ones((node_count, node_count), dtype=np.int64) - np.eye(node_count, dtype=np.int64))


@numba.njit(cache=True)
def _hafnian_subsets(matrix):
    n = matrix.shape[0]
    table = np.zeros(1 << n, dtype=np.complex128)
    table[0] = 1.0
    for mask in range(1, 1 << n):
        bits = 0
        low = -1
        for k in range(n):
            if (mask >> k) & 1:
                bits += 1
                if low < 0:
                    low = k
        if bits % 2 == 1:
            continue
        rest = mask ^ (1 << low)
        total = 0.0 + 0.0j
        for j in range(low + 1, n):
            if (rest >> j) & 1:
                total += matrix[low, j] * table[rest ^ (1 << j)]
        table[mask] = total
    return table[(1 << n) - 1]


def _hafnian_recursive(matrix: np.ndarray) -> complex:
    n = matrix.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    total = 0.0 + 0.0j
    rest = np.arange(1, n)
    for k, j in enumerate(rest):
        if matrix[0, j] == 0:
            continue
        keep = np.delete(rest, k)
        total += matrix[0, j] * _hafnian_recursive(matrix[np.ix_(keep, keep)])
    return total


def hafnian(matrix: np.ndarray, method: str = "subsets", atol: float = SYMMETRY_TOLERANCE) -> complex:
    """
    Hafnian of a symmetric matrix.

    ``method="subsets"`` memoises the first-row pairing recursion over index
    subsets (cost ``O(2^n n)``, numba-compiled); ``method="recursive"`` evaluates
    the plain ``(n-1)!!``-term recursion.

    :param matrix: Symmetric ``n x n`` matrix
    :type matrix: np.ndarray
    :param method: ``"subsets"`` or ``"recursive"``
    :type method: str
    :param atol: Symmetry tolerance
    :type atol: float
    :returns: The hafnian; ``1`` for the empty matrix, ``0`` for odd ``n``
    :rtype: complex
    :raises SymmetryError: If the matrix is not symmetric
    :raises SizeLimitError: If ``n`` exceeds ``MAX_HAFNIAN_SIZE``

    Examples
    --------
    >>> hafnian(np.ones((4, 4)) - np.eye(4))
    (3+0j)
    """
    matrix = check_square(matrix)
    if not is_symmetric(matrix, atol):
        raise SymmetryError("hafnian requires a symmetric matrix")

    n = matrix.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n % 2 == 1:
        return 0.0 + 0.0j
    if n > MAX_HAFNIAN_SIZE:
        raise SizeLimitError(f"hafnian of size {n} exceeds the limit {MAX_HAFNIAN_SIZE}")

    matrix = np.ascontiguousarray(matrix, dtype=np.complex128)
    if method == "subsets":
        return complex(_hafnian_subsets(matrix))
    if method == "recursive":
        return complex(_hafnian_recursive(matrix))
    raise ParameterError(f"unknown hafnian method '{method}'")


def iter_perfect_matchings(adjacency: np.ndarray) -> Iterator[list[tuple[int, int]]]:
    """
    Yield every perfect matching of a graph as a list of edges.

    The lowest unmatched node is paired with each neighbour in turn.
    """
    adjacency = np.asarray(adjacency)

    def _pairings(nodes: list[int]) -> Iterator[list[tuple[int, int]]]:
        if not nodes:
            yield []
            return
        first, others = nodes[0], nodes[1:]
        for k, other in enumerate(others):
            if adjacency[first, other]:
                for rest in _pairings(others[:k] + others[k + 1 :]):
                    yield [(first, other)] + rest

    n = adjacency.shape[0]
    if n % 2 == 1:
        return
    yield from _pairings(list(range(n)))


def count_perfect_matchings(graph: Graph) -> int:
    """
    Count perfect matchings by exhaustive enumeration.

    Factorial-time oracle for checking :func:`hafnian`.

    :param graph: Simple graph with at most ``MAX_MATCHING_ORACLE_NODES`` nodes
    :type graph: Graph
    :returns: Number of perfect matchings
    :rtype: int
    :raises SizeLimitError: If the graph is too large

    Examples
    --------
    >>> count_perfect_matchings(Graph.complete(6))
    15
    """
    if graph.node_count > MAX_MATCHING_ORACLE_NODES:
        raise SizeLimitError(
            f"matching oracle limited to {MAX_MATCHING_ORACLE_NODES} nodes, got {graph.node_count}"
        )
    return sum(1 for _ in iter_perfect_matchings(graph.adjacency))


@numba.njit(cache=True)
def _permanent_ryser(matrix):
    n = matrix.shape[0]
    row_sums = np.zeros(n, dtype=np.complex128)
    chosen = np.zeros(n, dtype=np.bool_)
    size = 0
    total = 0.0 + 0.0j
    for k in range(1, 1 << n):
        j = 0
        while not (k >> j) & 1:
            j += 1
        if chosen[j]:
            chosen[j] = False
            size -= 1
            for i in range(n):
                row_sums[i] -= matrix[i, j]
        else:
            chosen[j] = True
            size += 1
            for i in range(n):
                row_sums[i] += matrix[i, j]
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= row_sums[i]
        if size % 2 == 1:
            total -= prod
        else:
            total += prod
    if n % 2 == 1:
        total = -total
    return total


def permanent(matrix: np.ndarray) -> complex:
    """
    Permanent by Ryser inclusion-exclusion over Gray-code ordered column subsets.

    :param matrix: Square matrix
    :type matrix: np.ndarray
    :returns: The permanent; ``1`` for the empty matrix
    :rtype: complex
    :raises DimensionError: If the matrix is not square
    :raises SizeLimitError: If ``n`` exceeds ``MAX_PERMANENT_SIZE``

    Examples
    --------
    >>> permanent(np.ones((3, 3)))
    (6+0j)
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"permanent requires a square matrix, got shape {matrix.shape}")
    n = matrix.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n > MAX_PERMANENT_SIZE:
        raise SizeLimitError(f"permanent of size {n} exceeds the limit {MAX_PERMANENT_SIZE}")
    return complex(_permanent_ryser(np.ascontiguousarray(matrix, dtype=np.complex128)))


def block_bipartite(matrix: np.ndarray) -> np.ndarray:
    """Return ``[[0, M], [M^T, 0]]``, whose hafnian is ``Per(M)``."""
    matrix = check_square(matrix)
    n = matrix.shape[0]
    zero = np.zeros((n, n), dtype=np.result_type(matrix, np.complex128))
    return np.block([[zero, matrix], [matrix.T, zero]])
