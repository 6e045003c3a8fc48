"""
Seeded photon-count samplers.

The four classically simulable input classes are sampled directly; squeezed
vacuum is sampled by brute force from its exact law, which is practical only
for small instances.

Samples are produced in blocks of ``SAMPLE_BLOCK_SIZE``; block ``b`` draws from
its own PCG64 stream keyed by ``(seed, b)``, so the result does not depend on
how many workers generate the blocks.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
import structlog

from .constants import GENERATOR_VERSION, MAX_ENUMERATION, SAMPLE_BLOCK_SIZE, SOURCE_TAIL_MASS
from .errors import DimensionError, ParameterError, SizeLimitError
from .gaussian import (
    GaussianModel,
    TruncatedDistribution,
    iter_patterns,
    pattern_count,
    smsv_photon_number_dist,
    thermal_photon_number_dist,
)
from .linalg import block_generator
from .models import ModelKind, SampleSetHeader

log = structlog.get_logger(__name__)

BlockDraw = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``N x m`` photon counts drawn from one model."""

    kind: ModelKind
    parameter_digest: str
    seed: int
    m: int
    samples: np.ndarray
    generator: str = GENERATOR_VERSION
    truncation: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.int64)
        if samples.ndim != 2 or samples.shape[1] != self.m:
            raise DimensionError(f"samples must have shape (N, {self.m}), got {samples.shape}")
        if np.any(samples < 0):
            raise ParameterError("photon counts must be non-negative")
        object.__setattr__(self, "samples", samples)

    @property
    def sample_count(self) -> int:
        return int(self.samples.shape[0])

    def totals(self) -> np.ndarray:
        return self.samples.sum(axis=1)

    def patterns(self) -> Iterator[tuple[int, ...]]:
        for row in self.samples:
            yield tuple(int(c) for c in row)

    def header(
        self,
        label: str | None = None,
        config_digest: str | None = None,
        seed_lineage: dict | None = None,
    ) -> SampleSetHeader:
        return SampleSetHeader(
            label=label,
            kind=self.kind,
            parameters=self.parameters,
            parameter_digest=self.parameter_digest,
            m=self.m,
            n_samples=self.sample_count,
            seed=self.seed,
            generator=self.generator,
            truncation=self.truncation,
            config_digest=config_digest,
            seed_lineage=seed_lineage or {},
        )

    @classmethod
    def from_header(cls, header: SampleSetHeader, samples: np.ndarray) -> "SampleSet":
        return cls(
            kind=header.kind,
            parameter_digest=header.parameter_digest,
            seed=header.seed,
            m=header.m,
            samples=samples,
            generator=header.generator,
            truncation=header.truncation,
            parameters=header.parameters,
        )


def _block_sizes(n_samples: int) -> list[int]:
    full, rest = divmod(n_samples, SAMPLE_BLOCK_SIZE)
    return [SAMPLE_BLOCK_SIZE] * full + ([rest] if rest else [])


def generate_blocks(n_samples: int, seed: int, m: int, draw: BlockDraw, workers: int = 1) -> np.ndarray:
    """
    Run ``draw(rng, size)`` once per block and stack the blocks in index order.

    :param n_samples: Total number of samples ``N >= 1``
    :type n_samples: int
    :param seed: Master seed of the sample set
    :type seed: int
    :param m: Mode count
    :type m: int
    :param draw: Block sampler returning a ``(size, m)`` integer array
    :type draw: Callable[[np.random.Generator, int], np.ndarray]
    :param workers: Thread count
    :type workers: int
    :returns: ``(N, m)`` counts
    :rtype: np.ndarray
    :raises ParameterError: If ``N < 1``
    """
    if n_samples < 1:
        raise ParameterError(f"sample count must be at least 1, got {n_samples}")

    sizes = _block_sizes(n_samples)

    def _run(block: int) -> np.ndarray:
        return np.asarray(draw(block_generator(seed, block), sizes[block]), dtype=np.int64)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_run, range(len(sizes))))
    else:
        blocks = [_run(b) for b in range(len(sizes))]

    samples = np.vstack(blocks) if blocks else np.zeros((0, m), dtype=np.int64)
    return samples.reshape(n_samples, m)


def source_cutoff(kind: ModelKind, parameter: float, tail_mass: float = SOURCE_TAIL_MASS) -> TruncatedDistribution:
    """
    Smallest truncation of one source's photon-number law with tail below ``tail_mass``.

    Squeezed sources are cut at an even photon number.
    """
    if kind.emits_pairs:
        cutoff = 2
        dist = smsv_photon_number_dist(parameter, cutoff)
        while dist.tail_mass >= tail_mass:
            cutoff += 2
            dist = smsv_photon_number_dist(parameter, cutoff)
        return dist

    if parameter == 0.0:
        return thermal_photon_number_dist(0.0, 0)
    ratio = parameter / (1.0 + parameter)
    cutoff = max(0, int(np.ceil(np.log(tail_mass) / np.log(ratio))) - 1)
    dist = thermal_photon_number_dist(parameter, cutoff)
    while dist.tail_mass >= tail_mass:
        cutoff += 1
        dist = thermal_photon_number_dist(parameter, cutoff)
    return dist


def _sample_set(model: GaussianModel, seed: int, samples: np.ndarray, truncation: dict | None = None) -> SampleSet:
    return SampleSet(
        kind=model.kind,
        parameter_digest=model.digest(),
        seed=int(seed),
        m=model.m,
        samples=samples,
        truncation=truncation or {},
        parameters=model.parameters(),
    )


def sample_thermal(circuit: np.ndarray, mean_photons: np.ndarray, n_samples: int, seed: int, workers: int = 1) -> SampleSet:
    """
    Sample thermal light through the circuit via its P-function.

    Each sample draws complex Gaussian amplitudes with ``E|alpha_i|^2 = <n_i>``,
    evolves them through the circuit and draws Poisson counts with means ``|beta_j|^2``.

    Examples
    --------
    >>> s = sample_thermal(np.eye(2), np.zeros(2), 10, seed=1)
    >>> int(s.samples.sum())
    0
    """
    model = GaussianModel.thermal(circuit, mean_photons)
    u = model.circuit
    scale = np.sqrt(model.mean_photons / 2.0)

    def _draw(rng: np.random.Generator, size: int) -> np.ndarray:
        alphas = scale * (rng.standard_normal((size, model.m)) + 1j * rng.standard_normal((size, model.m)))
        intensities = np.abs(alphas @ u.T) ** 2
        return rng.poisson(intensities)

    return _sample_set(model, seed, generate_blocks(n_samples, seed, model.m, _draw, workers))


def sample_coherent(circuit: np.ndarray, alphas: np.ndarray, n_samples: int, seed: int, workers: int = 1) -> SampleSet:
    """Independent Poisson counts with means ``|beta_j|^2``, ``beta = U alpha``."""
    model = GaussianModel.coherent(circuit, alphas)
    intensities = np.abs(model.betas) ** 2

    def _draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.poisson(intensities, size=(size, model.m))

    return _sample_set(model, seed, generate_blocks(n_samples, seed, model.m, _draw, workers))


def _sample_distinguishable(model: GaussianModel, n_samples: int, seed: int, workers: int) -> SampleSet:
    params = model.squeezing if model.kind.emits_pairs else model.mean_photons
    dists = [source_cutoff(model.kind, float(p)) for p in params]
    source_probs = [d.with_residual_in_last_bin() for d in dists]

    weights = np.abs(model.circuit) ** 2
    routes = [weights[:, i] / weights[:, i].sum() for i in range(model.m)]

    def _draw(rng: np.random.Generator, size: int) -> np.ndarray:
        counts = np.zeros((size, model.m), dtype=np.int64)
        for probs, route in zip(source_probs, routes):
            emitted = rng.choice(len(probs), size=size, p=probs)
            counts += rng.multinomial(emitted, route)
        return counts

    truncation = {
        "cutoffs": [d.cutoff for d in dists],
        "max_tail_mass": max((d.tail_mass for d in dists), default=0.0),
        "residual_in_cutoff_bin": True,
    }
    samples = generate_blocks(n_samples, seed, model.m, _draw, workers)
    return _sample_set(model, seed, samples, truncation)


def sample_distinguishable_smsv(circuit: np.ndarray, squeezing: np.ndarray, n_samples: int, seed: int, workers: int = 1) -> SampleSet:
    """
    Distinguishable squeezed sources: each source emits ``k_i`` photons from its
    own law and every photon exits port ``j`` with probability ``|U[j, i]|^2``.
    """
    model = GaussianModel.distinguishable_smsv(circuit, squeezing)
    return _sample_distinguishable(model, n_samples, seed, workers)


def sample_distinguishable_thermal(circuit: np.ndarray, mean_photons: np.ndarray, n_samples: int, seed: int, workers: int = 1) -> SampleSet:
    """Distinguishable thermal sources with geometric photon-number laws."""
    model = GaussianModel.distinguishable_thermal(circuit, mean_photons)
    return _sample_distinguishable(model, n_samples, seed, workers)


def sample_gbs_bruteforce(
    circuit: np.ndarray,
    squeezing: np.ndarray,
    n_samples: int,
    seed: int,
    n_max: int,
    workers: int = 1,
) -> SampleSet:
    """
    Categorical sampling from the exact squeezed-vacuum law over all patterns
    with at most ``n_max`` photons.

    The probability mass above ``n_max`` is dropped, the rest renormalized, and
    the deficit recorded in ``truncation``.

    :raises SizeLimitError: If the enumeration exceeds ``MAX_ENUMERATION`` patterns
    """
    model = GaussianModel.smsv(circuit, squeezing)
    if n_max < 0:
        raise ParameterError(f"n_max must be non-negative, got {n_max}")

    sectors = list(range(0, n_max + 1, 2))
    total = sum(pattern_count(n, model.m) for n in sectors)
    if total > MAX_ENUMERATION:
        raise SizeLimitError(f"brute-force sampler would enumerate {total} patterns, limit {MAX_ENUMERATION}")

    patterns = [p for n in sectors for p in iter_patterns(n, model.m)]
    probs = np.array([model.probability(p) for p in patterns])
    mass = float(probs.sum())
    probs = probs / mass
    table = np.asarray(patterns, dtype=np.int64).reshape(len(patterns), model.m)

    log.debug("Enumerated squeezed-vacuum law", details={"patterns": len(patterns), "n_max": n_max, "mass": mass})

    def _draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return table[rng.choice(len(probs), size=size, p=probs)]

    truncation = {"n_max": n_max, "deficit": max(0.0, 1.0 - mass), "patterns": len(patterns)}
    samples = generate_blocks(n_samples, seed, model.m, _draw, workers)
    return _sample_set(model, seed, samples, truncation)


def sample_model(model: GaussianModel, n_samples: int, seed: int, workers: int = 1, n_max: int | None = None) -> SampleSet:
    """Dispatch to the sampler of the model's kind."""
    if model.kind is ModelKind.THERMAL:
        return sample_thermal(model.circuit, model.mean_photons, n_samples, seed, workers)
    if model.kind is ModelKind.COHERENT:
        return sample_coherent(model.circuit, model.amplitudes, n_samples, seed, workers)
    if model.kind is ModelKind.DISTINGUISHABLE_SMSV:
        return sample_distinguishable_smsv(model.circuit, model.squeezing, n_samples, seed, workers)
    if model.kind is ModelKind.DISTINGUISHABLE_THERMAL:
        return sample_distinguishable_thermal(model.circuit, model.mean_photons, n_samples, seed, workers)
    if n_max is None:
        raise ParameterError("the brute-force squeezed-vacuum sampler needs n_max")
    return sample_gbs_bruteforce(model.circuit, model.squeezing, n_samples, seed, n_max, workers)
