"""
Orbit combinatorics and orbit-probability estimators.

An orbit collects every mode permutation of a photon-count pattern.  Only the
orbits ``[1,...,1]``, ``[2,1,...,1]`` and ``[2,2,1,...,1]`` are used.
"""

from itertools import combinations
from math import factorial
from typing import Iterator, Sequence

import numpy as np
import structlog

from .constants import MAX_ENUMERATION, ORBIT_DOUBLES, SAMPLE_BLOCK_SIZE
from .errors import DimensionError, OrbitError, ParameterError, SizeLimitError
from .gaussian import GaussianModel, PhotonPattern, smsv_B_matrix, smsv_pattern_probability
from .linalg import as_generator, block_generator
from .models import EstimateMethod, OrbitEstimate, OrbitId
from .samplers import SampleSet

log = structlog.get_logger(__name__)


def _check_fits(orbit: OrbitId) -> None:
    if orbit.occupied > orbit.m:
        raise OrbitError(f"orbit {orbit.label} with n={orbit.n} needs {orbit.occupied} modes, m={orbit.m}")


def canonical_pattern(orbit: OrbitId) -> PhotonPattern:
    """``[2]*d + [1]*(n-2d) + [0]*...`` padded to ``m`` modes."""
    _check_fits(orbit)
    return tuple([2] * orbit.d + [1] * orbit.singles + [0] * (orbit.m - orbit.occupied))


def orbit_cardinality(orbit: OrbitId) -> int:
    """
    Number of distinct arrangements ``m! / (d! (n-2d)! z!)``.

    :raises OrbitError: If the canonical pattern does not fit in ``m`` modes

    Examples
    --------
    >>> orbit_cardinality(OrbitId(n=4, d=1, m=4))
    12
    """
    _check_fits(orbit)
    zeros = orbit.m - orbit.occupied
    return factorial(orbit.m) // (factorial(orbit.d) * factorial(orbit.singles) * factorial(zeros))


def orbit_membership(pattern: Sequence[int]) -> OrbitId | None:
    """
    The in-scope orbit a pattern belongs to, or ``None``.

    Examples
    --------
    >>> orbit_membership((2, 2, 1, 0))
    OrbitId(n=5, d=2, m=4)
    >>> orbit_membership((3, 1, 0, 0)) is None
    True
    """
    counts = [int(c) for c in pattern]
    if not counts or any(c < 0 or c > 2 for c in counts):
        return None
    d = counts.count(2)
    if d not in ORBIT_DOUBLES:
        return None
    return OrbitId(n=sum(counts), d=d, m=len(counts))


def uniform_orbit_draw(orbit: OrbitId, rng) -> PhotonPattern:
    """A uniformly random member of the orbit (a shuffle of the canonical pattern)."""
    rng = as_generator(rng)
    return tuple(int(c) for c in rng.permutation(canonical_pattern(orbit)))


def iter_orbit_members(orbit: OrbitId) -> Iterator[PhotonPattern]:
    """Yield every distinct member of the orbit once, in a fixed order."""
    _check_fits(orbit)
    modes = range(orbit.m)
    for doubles in combinations(modes, orbit.d):
        rest = [k for k in modes if k not in doubles]
        for singles in combinations(rest, orbit.singles):
            pattern = [0] * orbit.m
            for k in doubles:
                pattern[k] = 2
            for k in singles:
                pattern[k] = 1
            yield tuple(pattern)


def _draw_members(orbit: OrbitId, draws: int, seed: int) -> np.ndarray:
    canonical = np.asarray(canonical_pattern(orbit), dtype=np.int64)
    members = []
    full, rest = divmod(draws, SAMPLE_BLOCK_SIZE)
    sizes = [SAMPLE_BLOCK_SIZE] * full + ([rest] if rest else [])
    for block, size in enumerate(sizes):
        rng = block_generator(seed, block)
        members.extend(rng.permutation(canonical) for _ in range(size))
    return np.asarray(members, dtype=np.int64).reshape(draws, orbit.m)


def mc_orbit_estimate(
    circuit: np.ndarray,
    squeezing: np.ndarray,
    orbit: OrbitId,
    draws: int,
    seed: int,
    max_size: int = 16,
    exhaustive: bool = False,
) -> OrbitEstimate:
    """
    Monte Carlo estimate of a squeezed-vacuum orbit probability.

    Members are drawn uniformly with replacement; the estimate is ``|O|`` times
    the mean exact probability and the standard error is ``|O| * std / sqrt(N)``.
    With ``exhaustive=True`` every member is evaluated once and the exact sum is
    returned.  A sampled estimate above 1 is clipped to 1; ``std_error`` stays the
    unclipped sampling error.

    :param circuit: ``m x m`` unitary
    :type circuit: np.ndarray
    :param squeezing: Squeezing parameters
    :type squeezing: np.ndarray
    :param orbit: Orbit to estimate
    :type orbit: OrbitId
    :param draws: Number of member draws ``N``
    :type draws: int
    :param seed: Seed of the draw streams
    :type seed: int
    :param max_size: Largest photon number (hafnian size) allowed
    :type max_size: int
    :param exhaustive: Evaluate every member instead of sampling
    :type exhaustive: bool
    :returns: The estimate
    :rtype: OrbitEstimate
    :raises SizeLimitError: If ``n`` exceeds ``max_size``
    :raises OrbitError: If the orbit does not fit in the circuit's modes
    """
    b = smsv_B_matrix(circuit, squeezing)
    if b.shape[0] != orbit.m:
        raise DimensionError(f"orbit has m={orbit.m}, circuit has {b.shape[0]} modes")
    if orbit.n > max_size:
        raise SizeLimitError(f"orbit n={orbit.n} exceeds the hafnian size limit {max_size}")

    cardinality = orbit_cardinality(orbit)
    prefactor = float(np.prod(1.0 / np.cosh(np.asarray(squeezing, dtype=float))))

    if exhaustive:
        if cardinality > MAX_ENUMERATION:
            raise SizeLimitError(f"orbit has {cardinality} members, limit {MAX_ENUMERATION}")
        total = sum(smsv_pattern_probability(b, prefactor, p) for p in iter_orbit_members(orbit))
        return OrbitEstimate(
            orbit=orbit,
            value=float(total),
            std_error=0.0,
            method=EstimateMethod.EXACT,
            draws_or_samples=cardinality,
            seed=int(seed),
        )

    if draws < 1:
        raise ParameterError(f"draw count must be at least 1, got {draws}")

    if orbit.n % 2 == 1:
        values = np.zeros(draws)
    else:
        members = _draw_members(orbit, draws, seed)
        values = np.array([smsv_pattern_probability(b, prefactor, tuple(row)) for row in members])

    value = cardinality * float(values.mean())
    std_error = cardinality * float(values.std(ddof=1)) / np.sqrt(draws) if draws > 1 else 0.0

    log.debug(
        "Monte Carlo orbit estimate",
        details={"orbit": orbit.label, "n": orbit.n, "m": orbit.m, "value": value, "std_error": std_error},
    )

    return OrbitEstimate(
        orbit=orbit,
        value=min(value, 1.0),
        std_error=std_error,
        method=EstimateMethod.MONTE_CARLO,
        draws_or_samples=draws,
        seed=int(seed),
    )


def exact_orbit_prob(model: GaussianModel, orbit: OrbitId) -> OrbitEstimate:
    """
    Sum the model's exact law over every orbit member.

    :raises SizeLimitError: If the orbit has more than ``MAX_ENUMERATION`` members
    """
    if model.m != orbit.m:
        raise DimensionError(f"orbit has m={orbit.m}, model has {model.m} modes")
    cardinality = orbit_cardinality(orbit)
    if cardinality > MAX_ENUMERATION:
        raise SizeLimitError(f"orbit has {cardinality} members, limit {MAX_ENUMERATION}")

    total = sum(model.probability(p) for p in iter_orbit_members(orbit))
    return OrbitEstimate(
        orbit=orbit,
        value=min(float(total), 1.0),
        std_error=0.0,
        method=EstimateMethod.EXACT,
        draws_or_samples=cardinality,
    )


def orbit_indicator(samples: np.ndarray, orbit: OrbitId) -> np.ndarray:
    """Boolean mask of the samples that belong to ``orbit``."""
    samples = np.asarray(samples)
    in_scope = np.all(samples <= 2, axis=1)
    return in_scope & (samples.sum(axis=1) == orbit.n) & ((samples == 2).sum(axis=1) == orbit.d)


def empirical_orbit_probs(samples: SampleSet, orbits: Sequence[OrbitId]) -> list[OrbitEstimate]:
    """
    Orbit frequencies over the whole sample set, with binomial standard errors.

    """
    n_samples = samples.sample_count
    if n_samples < 1:
        raise DimensionError("empirical orbit probabilities need at least one sample")

    estimates = []
    for orbit in orbits:
        if orbit.m != samples.m:
            raise DimensionError(f"orbit has m={orbit.m}, samples have {samples.m} modes")
        p = float(np.count_nonzero(orbit_indicator(samples.samples, orbit))) / n_samples
        estimates.append(
            OrbitEstimate(
                orbit=orbit,
                value=p,
                std_error=float(np.sqrt(p * (1.0 - p) / n_samples)),
                method=EstimateMethod.EMPIRICAL,
                draws_or_samples=n_samples,
                seed=samples.seed,
            )
        )
    return estimates
