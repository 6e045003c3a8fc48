"""
Output-probability laws of the Gaussian input classes.

Squeezed vacuum through a passive circuit (hafnian law), thermal light
(permanent law), coherent light (product of Poisson laws), and distinguishable
squeezed or thermal sources whose photons are routed independently.

Circuit convention: output mode ``j`` receives ``a'_j = sum_i U[j, i] a_i``, so
``B = U diag(tanh s) U^T``, ``C = U diag(tau) U^dagger``, coherent amplitudes
evolve as ``beta = U alpha`` and a photon from source ``i`` exits port ``j``
with probability ``|U[j, i]|^2``.
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product
from math import comb, factorial, prod
from typing import Iterator, Sequence

import hashlib

import numpy as np
import scipy.stats
import structlog

from .constants import MAX_ENUMERATION, MAX_THERMAL_PHOTONS
from .errors import DimensionError, ParameterError, SizeLimitError
from .linalg import as_generator, check_square, repeat_submatrix
from .matchings import block_bipartite, hafnian, permanent
from .models import CircuitBundle, ModelKind

log = structlog.get_logger(__name__)

PhotonPattern = tuple[int, ...]


def as_pattern(pattern: Sequence[int], m: int | None = None) -> PhotonPattern:
    """Validate a photon-count pattern and return it as a tuple of ints."""
    counts = tuple(int(c) for c in pattern)
    if m is not None and len(counts) != m:
        raise DimensionError(f"pattern has {len(counts)} modes, expected {m}")
    if any(c < 0 for c in counts):
        raise ParameterError(f"photon counts must be non-negative: {counts}")
    return counts


def _check_circuit(u: np.ndarray, length: int, name: str) -> np.ndarray:
    u = check_square(u, "circuit")
    if u.shape[0] != length:
        raise DimensionError(f"{name} has length {length}, circuit has {u.shape[0]} modes")
    return u


def _pattern_factorials(pattern: PhotonPattern) -> int:
    return prod(factorial(c) for c in pattern)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Complex covariance ``sigma`` in ``(a_1..a_m, a_1^dagger..a_m^dagger)`` ordering."""

    sigma: np.ndarray

    @property
    def modes(self) -> int:
        return self.sigma.shape[0] // 2

    @property
    def sigma_q(self) -> np.ndarray:
        return self.sigma + 0.5 * np.eye(self.sigma.shape[0])

    def is_hermitian(self, atol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.sigma - self.sigma.conj().T), initial=0.0) <= atol)

    def vacuum_prefactor(self) -> float:
        """``det(sigma_Q)^(-1/2)``."""
        det = np.linalg.det(self.sigma_q)
        return float(1.0 / np.sqrt(det.real))


@dataclass(frozen=True)
class TruncatedDistribution:
    """Photon-number law on ``0..cutoff`` with the mass beyond the cutoff reported separately."""

    probabilities: np.ndarray
    tail_mass: float

    @property
    def cutoff(self) -> int:
        return len(self.probabilities) - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.probabilities)), self.probabilities))

    def with_residual_in_last_bin(self) -> np.ndarray:
        probs = self.probabilities.copy()
        probs[-1] += self.tail_mass
        return probs


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """
    Input-state class with its circuit and source parameters.

    Exactly the parameter set matching ``kind`` is present: ``squeezing`` for the
    SMSV kinds, ``mean_photons`` for the thermal kinds, ``amplitudes`` for coherent.
    """

    kind: ModelKind
    circuit: np.ndarray
    squeezing: np.ndarray | None = None
    mean_photons: np.ndarray | None = None
    amplitudes: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        circuit = check_square(np.asarray(self.circuit, dtype=complex), "circuit")
        object.__setattr__(self, "circuit", circuit)
        m = circuit.shape[0]

        expected = {
            ModelKind.SMSV: "squeezing",
            ModelKind.DISTINGUISHABLE_SMSV: "squeezing",
            ModelKind.THERMAL: "mean_photons",
            ModelKind.DISTINGUISHABLE_THERMAL: "mean_photons",
            ModelKind.COHERENT: "amplitudes",
        }[self.kind]

        for name in ("squeezing", "mean_photons", "amplitudes"):
            value = getattr(self, name)
            if name == expected:
                if value is None:
                    raise ParameterError(f"{self.kind.value} model requires '{name}'")
                dtype = complex if name == "amplitudes" else float
                value = np.asarray(value, dtype=dtype)
                if value.shape != (m,):
                    raise DimensionError(f"{name} has shape {value.shape}, circuit has {m} modes")
                if not np.all(np.isfinite(value)):
                    raise ParameterError(f"{name} must be finite")
                if name != "amplitudes" and np.any(value < 0):
                    raise ParameterError(f"{name} must be non-negative")
                object.__setattr__(self, name, value)
            elif value is not None:
                raise ParameterError(f"{self.kind.value} model does not take '{name}'")

    @classmethod
    def smsv(cls, circuit: np.ndarray, squeezing: np.ndarray) -> "GaussianModel":
        return cls(ModelKind.SMSV, circuit, squeezing=squeezing)

    @classmethod
    def thermal(cls, circuit: np.ndarray, mean_photons: np.ndarray) -> "GaussianModel":
        return cls(ModelKind.THERMAL, circuit, mean_photons=mean_photons)

    @classmethod
    def coherent(cls, circuit: np.ndarray, amplitudes: np.ndarray) -> "GaussianModel":
        return cls(ModelKind.COHERENT, circuit, amplitudes=amplitudes)

    @classmethod
    def distinguishable_smsv(cls, circuit: np.ndarray, squeezing: np.ndarray) -> "GaussianModel":
        return cls(ModelKind.DISTINGUISHABLE_SMSV, circuit, squeezing=squeezing)

    @classmethod
    def distinguishable_thermal(cls, circuit: np.ndarray, mean_photons: np.ndarray) -> "GaussianModel":
        return cls(ModelKind.DISTINGUISHABLE_THERMAL, circuit, mean_photons=mean_photons)

    @property
    def m(self) -> int:
        return self.circuit.shape[0]

    @cached_property
    def b_matrix(self) -> np.ndarray:
        return smsv_B_matrix(self.circuit, self.squeezing)

    @cached_property
    def c_matrix(self) -> np.ndarray:
        return thermal_C_matrix(self.circuit, self.mean_photons)

    @cached_property
    def betas(self) -> np.ndarray:
        return coherent_evolve(self.circuit, self.amplitudes)

    @cached_property
    def prefactor(self) -> float:
        return float(np.prod(1.0 / np.cosh(self.squeezing)))

    def mean_photon_number(self) -> float:
        if self.kind.emits_pairs:
            return float(np.sum(np.sinh(self.squeezing) ** 2))
        if self.kind is ModelKind.COHERENT:
            return float(np.sum(np.abs(self.amplitudes) ** 2))
        return float(np.sum(self.mean_photons))

    def source_distributions(self, cutoff: int) -> list[TruncatedDistribution]:
        """Per-source photon-number laws of the distinguishable kinds."""
        if self.kind is ModelKind.DISTINGUISHABLE_SMSV:
            return [smsv_photon_number_dist(s, cutoff) for s in self.squeezing]
        if self.kind is ModelKind.DISTINGUISHABLE_THERMAL:
            return [thermal_photon_number_dist(mu, cutoff) for mu in self.mean_photons]
        raise ParameterError(f"{self.kind.value} sources are not sampled independently")

    def probability(self, pattern: Sequence[int]) -> float:
        """Exact probability of a photon-count pattern."""
        pattern = as_pattern(pattern, self.m)
        if self.kind is ModelKind.SMSV:
            return smsv_pattern_probability(self.b_matrix, self.prefactor, pattern)
        if self.kind is ModelKind.THERMAL:
            return _thermal_pattern_probability(self.c_matrix, self.mean_photons, pattern)
        if self.kind is ModelKind.COHERENT:
            return coherent_probability(self.betas, pattern)
        dists = [d.probabilities for d in self.source_distributions(sum(pattern))]
        return distinguishable_probability(self.circuit, dists, pattern)

    def parameters(self) -> dict:
        """JSON-friendly parameter record."""
        params: dict = {"m": self.m}
        if self.squeezing is not None:
            params["squeezing"] = [float(x) for x in self.squeezing]
        if self.mean_photons is not None:
            params["mean_photons"] = [float(x) for x in self.mean_photons]
        if self.amplitudes is not None:
            params["amplitudes_real"] = [float(x) for x in self.amplitudes.real]
            params["amplitudes_imag"] = [float(x) for x in self.amplitudes.imag]
        params.update(self.metadata)
        return params

    def digest(self) -> str:
        h = hashlib.sha256(self.kind.value.encode("utf-8"))
        h.update(np.ascontiguousarray(self.circuit, dtype="<c16").tobytes())
        for value in (self.squeezing, self.mean_photons):
            if value is not None:
                h.update(np.ascontiguousarray(value, dtype="<f8").tobytes())
        if self.amplitudes is not None:
            h.update(np.ascontiguousarray(self.amplitudes, dtype="<c16").tobytes())
        return h.hexdigest()


def smsv_B_matrix(circuit: np.ndarray, squeezing: np.ndarray) -> np.ndarray:
    """
    ``B = U diag(tanh s) U^T`` for squeezed vacuum sources.

    :raises DimensionError: If the squeezing vector and circuit disagree

    Examples
    --------
    >>> smsv_B_matrix(np.eye(2), np.array([0.5, 0.0])).real.round(6)
    array([[0.462117, 0.      ],
           [0.      , 0.      ]])
    """
    squeezing = np.asarray(squeezing, dtype=float)
    u = _check_circuit(circuit, squeezing.shape[0], "squeezing")
    b = (u * np.tanh(squeezing)) @ u.T
    return 0.5 * (b + b.T)


def smsv_pattern_probability(b_matrix: np.ndarray, prefactor: float, pattern: PhotonPattern) -> float:
    """``prefactor * |Haf(B_n)|^2 / prod(n_i!)`` for a precomputed ``B``."""
    n = sum(pattern)
    if n % 2 == 1:
        return 0.0
    sub = repeat_submatrix(b_matrix, pattern)
    value = abs(hafnian(sub)) ** 2
    return float(prefactor * value / _pattern_factorials(pattern))


def gbs_probability(circuit: np.ndarray, squeezing: np.ndarray, pattern: Sequence[int]) -> float:
    """
    Probability of a photon-count pattern for squeezed vacuum through the circuit.

    The prefactor ``|sigma_Q|^(-1/2)`` is evaluated as ``prod sech(s_i)``; odd
    totals have probability exactly zero.

    :param circuit: ``m x m`` unitary
    :type circuit: np.ndarray
    :param squeezing: Squeezing parameters, length ``m``
    :type squeezing: np.ndarray
    :param pattern: Photon counts per output mode
    :type pattern: Sequence[int]
    :returns: The probability
    :rtype: float
    :raises DimensionError: On a length mismatch

    Examples
    --------
    >>> r = 0.4
    >>> p = gbs_probability(np.eye(2), np.array([r, 0.0]), (2, 0))
    >>> bool(np.isclose(p, np.tanh(r) ** 2 / np.cosh(r) / 2))
    True
    """
    squeezing = np.asarray(squeezing, dtype=float)
    b = smsv_B_matrix(circuit, squeezing)
    pattern = as_pattern(pattern, b.shape[0])
    prefactor = float(np.prod(1.0 / np.cosh(squeezing)))
    return smsv_pattern_probability(b, prefactor, pattern)


def build_covariance(circuit: np.ndarray, squeezing: np.ndarray) -> CovarianceMatrix:
    """
    Covariance of ``m`` squeezed vacua after the circuit.

    Blocks are ``U N U^dagger + I/2`` and ``U M U^T`` with ``N = diag(sinh^2 s)`` and
    ``M = diag(sinh s cosh s)``; the lower blocks are their conjugates.
    """
    squeezing = np.asarray(squeezing, dtype=float)
    u = _check_circuit(circuit, squeezing.shape[0], "squeezing")
    m = u.shape[0]

    occupation = (u * np.sinh(squeezing) ** 2) @ u.conj().T
    pairing = (u * (np.sinh(squeezing) * np.cosh(squeezing))) @ u.T
    half = 0.5 * np.eye(m)

    sigma = np.block(
        [
            [occupation + half, pairing],
            [pairing.conj(), occupation.conj() + half],
        ]
    )
    return CovarianceMatrix(sigma=sigma)


def thermal_C_matrix(circuit: np.ndarray, mean_photons: np.ndarray) -> np.ndarray:
    """
    ``C = U diag(tau) U^dagger`` with ``tau_i = <n_i> / (1 + <n_i>)``.

    :raises ParameterError: If a mean photon number is negative
    """
    mean_photons = np.asarray(mean_photons, dtype=float)
    if np.any(mean_photons < 0):
        raise ParameterError("mean photon numbers must be non-negative")
    u = _check_circuit(circuit, mean_photons.shape[0], "mean_photons")
    tau = mean_photons / (1.0 + mean_photons)
    c = (u * tau) @ u.conj().T
    return 0.5 * (c + c.conj().T)


def _thermal_pattern_probability(c_matrix: np.ndarray, mean_photons: np.ndarray, pattern: PhotonPattern) -> float:
    n = sum(pattern)
    if n > MAX_THERMAL_PHOTONS:
        raise SizeLimitError(f"thermal law limited to {MAX_THERMAL_PHOTONS} photons, got {n}")
    per = permanent(repeat_submatrix(c_matrix, pattern))
    norm = _pattern_factorials(pattern) * float(np.prod(1.0 + mean_photons))
    return float(per.real / norm)


def thermal_probability(circuit: np.ndarray, mean_photons: np.ndarray, pattern: Sequence[int]) -> float:
    """
    ``Per(C_n) / (prod n_j! prod (1 + <n_i>))`` for thermal sources.

    :raises SizeLimitError: If the pattern holds more than ``MAX_THERMAL_PHOTONS`` photons

    Examples
    --------
    >>> p = thermal_probability(np.eye(1), np.array([1.0]), (2,))
    >>> round(p, 12)
    0.125
    """
    mean_photons = np.asarray(mean_photons, dtype=float)
    c = thermal_C_matrix(circuit, mean_photons)
    return _thermal_pattern_probability(c, mean_photons, as_pattern(pattern, c.shape[0]))


def thermal_probability_via_hafnian(circuit: np.ndarray, mean_photons: np.ndarray, pattern: Sequence[int]) -> float:
    """Thermal law evaluated through the hafnian of ``[[0, C_n], [C_n^T, 0]]``."""
    mean_photons = np.asarray(mean_photons, dtype=float)
    c = thermal_C_matrix(circuit, mean_photons)
    pattern = as_pattern(pattern, c.shape[0])
    sub = repeat_submatrix(c, pattern)
    value = hafnian(block_bipartite(sub))
    norm = _pattern_factorials(pattern) * float(np.prod(1.0 + mean_photons))
    return float(value.real / norm)


def thermal_probability_pfunction(
    circuit: np.ndarray,
    mean_photons: np.ndarray,
    pattern: Sequence[int],
    draws: int,
    seed=None,
) -> tuple[float, float]:
    """
    Average the coherent law over the thermal P-function.

    Each source amplitude is a complex Gaussian with ``E|alpha_i|^2 = <n_i>``.

    :returns: Monte Carlo mean and its standard error
    :rtype: tuple[float, float]
    """
    mean_photons = np.asarray(mean_photons, dtype=float)
    u = _check_circuit(circuit, mean_photons.shape[0], "mean_photons")
    pattern = np.asarray(as_pattern(pattern, u.shape[0]))
    rng = as_generator(seed)

    scale = np.sqrt(mean_photons / 2.0)
    alphas = scale * (rng.standard_normal((draws, u.shape[0])) + 1j * rng.standard_normal((draws, u.shape[0])))
    intensities = np.abs(alphas @ u.T) ** 2
    values = np.prod(scipy.stats.poisson.pmf(pattern[None, :], intensities), axis=1)

    std_error = float(values.std(ddof=1) / np.sqrt(draws)) if draws > 1 else 0.0
    return float(values.mean()), std_error


def coherent_evolve(circuit: np.ndarray, amplitudes: np.ndarray) -> np.ndarray:
    """``beta = U alpha``."""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    u = _check_circuit(circuit, amplitudes.shape[0], "amplitudes")
    return u @ amplitudes


def coherent_probability(betas: np.ndarray, pattern: Sequence[int]) -> float:
    """
    Product of per-mode Poisson laws with means ``|beta_j|^2``.

    Examples
    --------
    >>> round(coherent_probability(np.array([1.0]), (2,)), 4)
    0.1839
    """
    betas = np.asarray(betas, dtype=complex)
    counts = np.asarray(as_pattern(pattern, betas.shape[0]))
    return float(np.prod(scipy.stats.poisson.pmf(counts, np.abs(betas) ** 2)))


def smsv_photon_number_dist(squeezing: float, cutoff: int) -> TruncatedDistribution:
    """
    Photon-number law of one squeezed vacuum source.

    ``P(2k) = (2k)! / (4^k (k!)^2) tanh^(2k)(s) / cosh(s)`` and ``P(odd) = 0``.

    :param squeezing: Squeezing parameter ``s >= 0``
    :type squeezing: float
    :param cutoff: Largest photon number kept
    :type cutoff: int
    :returns: The truncated law and its tail mass
    :rtype: TruncatedDistribution
    """
    if squeezing < 0:
        raise ParameterError(f"squeezing must be non-negative, got {squeezing}")
    if cutoff < 0:
        raise ParameterError(f"cutoff must be non-negative, got {cutoff}")

    probs = np.zeros(cutoff + 1)
    t2 = np.tanh(squeezing) ** 2
    sech = 1.0 / np.cosh(squeezing)
    coef = 1.0
    power = 1.0
    for k in range(cutoff // 2 + 1):
        probs[2 * k] = coef * power * sech
        coef *= (2 * k + 1) / (2 * k + 2)
        power *= t2

    tail = max(0.0, 1.0 - float(probs.sum()))
    return TruncatedDistribution(probabilities=probs, tail_mass=tail)


def thermal_photon_number_dist(mean: float, cutoff: int) -> TruncatedDistribution:
    """Geometric law ``P(k) = <n>^k / (1 + <n>)^(k+1)`` of one thermal source."""
    if mean < 0:
        raise ParameterError(f"mean photon number must be non-negative, got {mean}")
    if cutoff < 0:
        raise ParameterError(f"cutoff must be non-negative, got {cutoff}")

    k = np.arange(cutoff + 1)
    ratio = mean / (1.0 + mean)
    probs = ratio**k / (1.0 + mean)
    return TruncatedDistribution(probabilities=probs, tail_mass=float(ratio ** (cutoff + 1)))


def distinguishable_probability(
    circuit: np.ndarray,
    source_dists: Sequence[np.ndarray],
    pattern: Sequence[int],
) -> float:
    """
    Exact law of independently routed photons from distinguishable sources.

    Source ``i`` emits ``k`` photons with probability ``source_dists[i][k]``; each
    photon exits port ``j`` with probability ``|U[j, i]|^2``.

    :param circuit: ``m x m`` unitary
    :type circuit: np.ndarray
    :param source_dists: Per-source photon-number laws covering at least ``sum(pattern)``
    :type source_dists: Sequence[np.ndarray]
    :param pattern: Output photon counts
    :type pattern: Sequence[int]
    :returns: The probability
    :rtype: float
    """
    u = _check_circuit(circuit, len(source_dists), "source_dists")
    m = u.shape[0]
    pattern = as_pattern(pattern, m)
    weights = np.abs(u) ** 2
    dists = [np.asarray(d, dtype=float) for d in source_dists]

    @lru_cache(maxsize=None)
    def _remaining(source: int, left: PhotonPattern) -> float:
        if source == m:
            return 1.0 if sum(left) == 0 else 0.0
        dist = dists[source]
        total = 0.0
        for sub in product(*(range(c + 1) for c in left)):
            k = sum(sub)
            if k >= len(dist) or dist[k] == 0.0:
                continue
            route = factorial(k) / _pattern_factorials(sub)
            route *= float(np.prod(weights[:, source] ** np.asarray(sub)))
            if route == 0.0:
                continue
            rest = tuple(a - b for a, b in zip(left, sub))
            total += dist[k] * route * _remaining(source + 1, rest)
        return total

    return float(_remaining(0, pattern))


def pattern_count(n: int, m: int) -> int:
    """Number of ``m``-mode patterns holding ``n`` photons."""
    return comb(n + m - 1, n)


def iter_patterns(n: int, m: int) -> Iterator[PhotonPattern]:
    """Yield every ``m``-mode pattern with ``n`` photons, in descending lexicographic order."""
    if m < 1:
        raise DimensionError(f"mode count must be at least 1, got {m}")
    if m == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in iter_patterns(n - first, m - 1):
            yield (first,) + rest


def exact_distribution(model: GaussianModel, n: int, m: int | None = None) -> dict[PhotonPattern, float]:
    """
    Complete ``n``-photon sector of a model's law.

    :param model: Any model kind
    :type model: GaussianModel
    :param n: Total photon number
    :type n: int
    :param m: Mode count (checked against the model when given)
    :type m: int | None
    :returns: Probability per pattern
    :rtype: dict[tuple[int, ...], float]
    :raises SizeLimitError: If the sector has more than ``MAX_ENUMERATION`` patterns
    """
    if m is not None and m != model.m:
        raise DimensionError(f"model has {model.m} modes, requested {m}")
    count = pattern_count(n, model.m)
    if count > MAX_ENUMERATION:
        raise SizeLimitError(f"sector n={n}, m={model.m} has {count} patterns, limit {MAX_ENUMERATION}")

    return {pattern: model.probability(pattern) for pattern in iter_patterns(n, model.m)}


def total_photon_distribution(model: GaussianModel, cutoff: int) -> TruncatedDistribution:
    """
    Law of the total photon number, which the passive circuit conserves.

    Source laws are convolved for the squeezed and thermal kinds; coherent light
    gives a Poisson law with mean ``||alpha||^2``.
    """
    if model.kind is ModelKind.COHERENT:
        k = np.arange(cutoff + 1)
        probs = scipy.stats.poisson.pmf(k, model.mean_photon_number())
    else:
        if model.kind.emits_pairs:
            sources = [smsv_photon_number_dist(s, cutoff) for s in model.squeezing]
        else:
            sources = [thermal_photon_number_dist(mu, cutoff) for mu in model.mean_photons]
        probs = np.zeros(cutoff + 1)
        probs[0] = 1.0
        for source in sources:
            probs = np.convolve(probs, source.probabilities)[: cutoff + 1]

    tail = max(0.0, 1.0 - float(np.sum(probs)))
    return TruncatedDistribution(probabilities=np.asarray(probs, dtype=float), tail_mass=tail)


def coherent_phases(m: int, seed=None) -> np.ndarray:
    """Uniform phases in ``[0, 2 pi)`` for the coherent mock-up amplitudes."""
    return as_generator(seed).uniform(0.0, 2.0 * np.pi, size=m)


def matched_models(
    circuit: np.ndarray,
    squeezing: np.ndarray,
    phases: np.ndarray | None = None,
) -> dict[ModelKind, GaussianModel]:
    """
    The five models on one circuit, each emitting the same mean photon number.

    Thermal sources get ``<n_i> = sinh^2 s_i``; coherent sources get
    ``alpha_i = sinh(s_i) exp(i phi_i)``.
    """
    squeezing = np.asarray(squeezing, dtype=float)
    means = np.sinh(squeezing) ** 2
    if phases is None:
        phases = np.zeros_like(squeezing)
    alphas = np.sinh(squeezing) * np.exp(1j * np.asarray(phases, dtype=float))

    return {
        ModelKind.SMSV: GaussianModel.smsv(circuit, squeezing),
        ModelKind.THERMAL: GaussianModel.thermal(circuit, means),
        ModelKind.COHERENT: GaussianModel.coherent(circuit, alphas),
        ModelKind.DISTINGUISHABLE_SMSV: GaussianModel.distinguishable_smsv(circuit, squeezing),
        ModelKind.DISTINGUISHABLE_THERMAL: GaussianModel.distinguishable_thermal(circuit, means),
    }


def model_from_bundle(bundle: CircuitBundle) -> GaussianModel:
    """Rebuild the model persisted in a circuit bundle."""
    circuit = bundle.unitary()
    kind = bundle.kind
    if kind.emits_pairs:
        return GaussianModel(kind, circuit, squeezing=np.asarray(bundle.squeezing))
    if kind is ModelKind.COHERENT:
        return GaussianModel(kind, circuit, amplitudes=bundle.amplitudes())
    return GaussianModel(kind, circuit, mean_photons=np.asarray(bundle.mean_photons))
