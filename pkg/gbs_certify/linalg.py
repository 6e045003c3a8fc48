"""
Complex dense matrix utilities.

Haar-random interferometers, the Takagi-Autonne factorization of real symmetric
matrices, the encoding of a graph into circuit and squeezing parameters, and
the pattern-repeated submatrix used by every probability law.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
import structlog

from .constants import SQUEEZING_CAP, SYMMETRY_TOLERANCE, UNITARY_TOLERANCE
from .errors import DimensionError, EncodingInfeasibleError, ParameterError, SymmetryError

log = structlog.get_logger(__name__)

SeedLike = int | np.random.SeedSequence | np.random.Generator | None


@dataclass(frozen=True)
class TakagiFactorization:
    """``A = U diag(c * lambdas) U^T`` with ``lambdas`` in ``[0, 1]`` sorted descending."""

    unitary: np.ndarray
    lambdas: np.ndarray
    scale: float

    def reconstruct(self) -> np.ndarray:
        u = self.unitary
        return (u * (self.scale * self.lambdas)) @ u.T


@dataclass(frozen=True)
class GraphEncoding:
    """Circuit and squeezing parameters whose B matrix equals ``scale * adjacency``."""

    unitary: np.ndarray
    squeezing: np.ndarray
    scale: float

    @property
    def mean_photons(self) -> float:
        return float(np.sum(np.sinh(self.squeezing) ** 2))


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(master: int, *keys: int) -> int:
    """
    Derive a child seed from a master seed and a path of non-negative integer keys.

    Examples
    --------
    >>> derive_seed(1234, 0, 4, 2) == derive_seed(1234, 0, 4, 2)
    True
    """
    sequence = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def block_generator(seed: int, block: int) -> np.random.Generator:
    """PCG64 stream for one fixed-size block of draws, keyed by ``(seed, block)``."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.PCG64(sequence))


def allclose(a: np.ndarray, b: np.ndarray, atol: float) -> bool:
    """Entry-wise comparison with an explicit absolute tolerance."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    if a.size == 0:
        return True
    return bool(np.max(np.abs(a - b)) <= atol)


def is_symmetric(matrix: np.ndarray, atol: float = SYMMETRY_TOLERANCE) -> bool:
    matrix = np.asarray(matrix)
    return matrix.ndim == 2 and matrix.shape[0] == matrix.shape[1] and allclose(matrix, matrix.T, atol)


def is_unitary(matrix: np.ndarray, atol: float = UNITARY_TOLERANCE) -> bool:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    return allclose(matrix @ matrix.conj().T, np.eye(matrix.shape[0]), atol)


def check_square(matrix: np.ndarray, name: str = "matrix") -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {matrix.shape}")
    return matrix


def haar_unitary(m: int, seed: SeedLike = None) -> np.ndarray:
    """
    Draw an ``m x m`` unitary from the Haar measure.

    A matrix of independent standard complex Gaussians is QR-factorized and the
    phases of ``diag(R)`` are moved into ``Q``.

    :param m: Mode count
    :type m: int
    :param seed: Seed, seed sequence or generator
    :type seed: int | np.random.SeedSequence | np.random.Generator | None
    :returns: Haar-distributed unitary
    :rtype: np.ndarray
    :raises DimensionError: If ``m < 1``

    Examples
    --------
    >>> u = haar_unitary(4, seed=7)
    >>> is_unitary(u)
    True
    """
    if m < 1:
        raise DimensionError(f"mode count must be at least 1, got {m}")

    rng = as_generator(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2.0)
    q, r = scipy.linalg.qr(z)
    d = np.diagonal(r)
    phases = d / np.abs(d)
    return q * phases


def takagi(matrix: np.ndarray, atol: float = SYMMETRY_TOLERANCE) -> TakagiFactorization:
    """
    Takagi-Autonne factorization of a real symmetric matrix.

    The orthogonal eigendecomposition ``A = Q diag(w) Q^T`` gives ``|w|`` as the
    Takagi values; columns with a negative eigenvalue are multiplied by ``1j`` so
    that ``U diag(|w|) U^T`` restores the sign.  Values are normalized by
    ``scale = max|w|`` so ``lambdas`` lie in ``[0, 1]`` with the largest exactly 1;
    the strict bound ``tanh r < 1`` is applied by ``encode_graph`` through its cap.
    Ties are ordered by ascending original index.

    :param matrix: Real symmetric matrix (a complex array with zero imaginary part is accepted)
    :type matrix: np.ndarray
    :param atol: Symmetry tolerance
    :type atol: float
    :returns: The factorization
    :rtype: TakagiFactorization
    :raises DimensionError: If the matrix is not square
    :raises SymmetryError: If the matrix is not symmetric
    :raises ParameterError: If the matrix has a non-zero imaginary part

    Examples
    --------
    >>> tk = takagi(np.array([[0.0, 1.0], [1.0, 0.0]]))
    >>> tk.lambdas
    array([1., 1.])
    """
    matrix = check_square(matrix)
    if not is_symmetric(matrix, atol):
        raise SymmetryError("Takagi factorization requires a symmetric matrix")
    if np.iscomplexobj(matrix):
        if np.max(np.abs(matrix.imag), initial=0.0) > atol:
            raise ParameterError("only real symmetric matrices are supported")
        matrix = matrix.real

    m = matrix.shape[0]
    sym = 0.5 * (matrix + matrix.T)
    w, q = np.linalg.eigh(sym)

    magnitudes = np.abs(w)
    order = np.lexsort((np.arange(m), -magnitudes))

    columns = q[:, order].astype(complex)
    negative = w[order] < 0
    columns[:, negative] *= 1j

    scale = float(magnitudes.max(initial=0.0))
    if scale == 0.0:
        scale = 1.0
    lambdas = magnitudes[order] / scale

    return TakagiFactorization(unitary=columns, lambdas=lambdas, scale=scale)


def photons_for_scale(scale: float, magnitudes: np.ndarray) -> float:
    """Mean photon number ``sum sinh^2(atanh(scale * x))`` of an encoded spectrum."""
    x2 = (scale * np.asarray(magnitudes)) ** 2
    return float(np.sum(x2 / (1.0 - x2)))


def encode_graph(
    adjacency: np.ndarray,
    mean_photons_target: float,
    max_tanh: float = SQUEEZING_CAP,
    tol: float = 1e-9,
) -> GraphEncoding:
    """
    Encode a simple undirected graph into circuit and squeezing parameters.

    The Takagi values ``|w_i|`` of the adjacency matrix are scaled by ``c`` so that
    ``tanh s_i = c |w_i|``; ``c`` is found by bisection on the increasing map
    ``c -> sum sinh^2(s_i)`` so the source emits ``mean_photons_target`` photons
    on average, subject to ``c * max|w| <= max_tanh``.

    :param adjacency: 0/1 symmetric matrix with zero diagonal
    :type adjacency: np.ndarray
    :param mean_photons_target: Target mean photon number (non-negative)
    :type mean_photons_target: float
    :param max_tanh: Cap on ``tanh s_i``
    :type max_tanh: float
    :param tol: Tolerance on the photon number
    :type tol: float
    :returns: Circuit, squeezing and the scale ``c``
    :rtype: GraphEncoding
    :raises ParameterError: If the graph is not simple
    :raises EncodingInfeasibleError: If the target cannot be reached

    Examples
    --------
    >>> k4 = np.ones((4, 4)) - np.eye(4)
    >>> enc = encode_graph(k4, 2.0)
    >>> round(enc.mean_photons, 9)
    2.0
    """
    adjacency = check_square(adjacency, "adjacency")
    if not is_symmetric(adjacency, SYMMETRY_TOLERANCE):
        raise SymmetryError("adjacency matrix must be symmetric")
    real = np.real_if_close(adjacency)
    if np.iscomplexobj(real) or not np.all(np.isin(real, (0, 1))):
        raise ParameterError("adjacency matrix must have 0/1 entries")
    if np.any(np.diagonal(real) != 0):
        raise ParameterError("adjacency matrix must have a zero diagonal")
    if mean_photons_target < 0 or not np.isfinite(mean_photons_target):
        raise ParameterError(f"mean photon target must be non-negative, got {mean_photons_target}")

    tk = takagi(real.astype(float))
    magnitudes = tk.scale * tk.lambdas
    top = float(magnitudes.max(initial=0.0))
    m = real.shape[0]

    if top == 0.0:
        if mean_photons_target > tol:
            raise EncodingInfeasibleError("an empty graph can only encode zero mean photons")
        return GraphEncoding(unitary=tk.unitary, squeezing=np.zeros(m), scale=0.0)

    c_max = max_tanh / top
    reachable = photons_for_scale(c_max, magnitudes)
    if mean_photons_target > reachable + tol:
        raise EncodingInfeasibleError(
            f"mean photon target {mean_photons_target} exceeds {reachable:.6g} "
            f"reachable with tanh(s) <= {max_tanh}"
        )

    if mean_photons_target == 0.0:
        c = 0.0
    elif mean_photons_target >= reachable:
        c = c_max
    else:
        c = scipy.optimize.bisect(
            lambda x: photons_for_scale(x, magnitudes) - mean_photons_target,
            0.0,
            c_max,
            xtol=1e-16,
            maxiter=200,
        )

    squeezing = np.arctanh(c * magnitudes)

    log.debug(
        "Encoded graph",
        details={"modes": m, "scale": c, "mean_photons": float(np.sum(np.sinh(squeezing) ** 2))},
    )

    return GraphEncoding(unitary=tk.unitary, squeezing=squeezing, scale=float(c))


def random_graph(m: int, edge_probability: float, seed: SeedLike = None) -> np.ndarray:
    """Erdos-Renyi ``G(m, p)`` adjacency matrix."""
    if m < 1:
        raise DimensionError(f"mode count must be at least 1, got {m}")
    rng = as_generator(seed)
    upper = np.triu(rng.random((m, m)) < edge_probability, k=1)
    return (upper | upper.T).astype(float)


def uniform_squeezing(m: int, mean_photons_target: float) -> np.ndarray:
    """Equal squeezing on all ``m`` sources with ``m sinh^2 s`` equal to the target."""
    if m < 1:
        raise DimensionError(f"mode count must be at least 1, got {m}")
    if mean_photons_target < 0:
        raise ParameterError(f"mean photon target must be non-negative, got {mean_photons_target}")
    return np.full(m, np.arcsinh(np.sqrt(mean_photons_target / m)))


def repeat_submatrix(matrix: np.ndarray, pattern) -> np.ndarray:
    """
    Repeat row and column ``i`` of ``matrix`` ``pattern[i]`` times.

    Repeats are adjacent and ordered by ascending mode index.

    :param matrix: Square ``m x m`` matrix
    :type matrix: np.ndarray
    :param pattern: Photon counts per mode, length ``m``
    :type pattern: Sequence[int]
    :returns: The ``n x n`` matrix with ``n = sum(pattern)``
    :rtype: np.ndarray
    :raises DimensionError: If the pattern length differs from ``m``

    Examples
    --------
    >>> repeat_submatrix(np.array([[1, 2], [2, 3]]), (2, 0))
    array([[1, 1],
           [1, 1]])
    """
    matrix = check_square(matrix)
    counts = np.asarray(pattern, dtype=np.int64)
    if counts.ndim != 1 or counts.shape[0] != matrix.shape[0]:
        raise DimensionError(
            f"pattern length {counts.shape} does not match matrix size {matrix.shape[0]}"
        )
    if np.any(counts < 0):
        raise ParameterError("photon counts must be non-negative")
    idx = np.repeat(np.arange(matrix.shape[0]), counts)
    return matrix[np.ix_(idx, idx)]
