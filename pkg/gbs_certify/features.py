"""
Feature vectors and linear graph kernels.

A feature vector holds the probabilities of the orbits ``[1,...,1]``,
``[2,1,...,1]`` and ``[2,2,1,...,1]`` in one photon sector.  The linear kernel
of two normalized feature vectors is their scalar product; ensembles of
kernels are summarised by their mean and spread and compared between input
classes.
"""

from typing import Sequence

import numpy as np
import structlog

from .constants import DEFAULT_KERNEL_THRESHOLD, ORBIT_DOUBLES
from .errors import AssemblyError, DegenerateDatasetError, NormalizationError, SectorMismatchError
from .models import FeatureVector, KernelSeparation, KernelStats, ModelKind, OrbitEstimate, OrbitId
from .samplers import SampleSet

log = structlog.get_logger(__name__)

NORMALIZATIONS = ("euclidean", "unit_sum")


def feature_orbits(n: int, m: int) -> list[OrbitId]:
    """
    The in-scope orbits that exist in the ``(n, m)`` sector, in feature order.

    Orbits needing more doubled modes than ``n`` allows, or more occupied modes
    than ``m``, are left out; their feature component is zero.

    Examples
    --------
    >>> [o.d for o in feature_orbits(4, 16)]
    [0, 1, 2]
    >>> [o.d for o in feature_orbits(2, 2)]
    [0, 1]
    """
    orbits = []
    for d in ORBIT_DOUBLES:
        if n - 2 * d < 0:
            continue
        orbit = OrbitId(n=n, d=d, m=m)
        if orbit.occupied <= m:
            orbits.append(orbit)
    return orbits


def feature_vector(
    estimates: Sequence[OrbitEstimate],
    label: ModelKind | None = None,
    replicate: int | None = None,
) -> FeatureVector:
    """
    Assemble orbit estimates of one sector into a feature vector.

    The estimates must cover exactly the orbits of :func:`feature_orbits` for
    their ``(n, m)``; components of orbits that cannot occur are zero.

    :param estimates: Orbit estimates sharing ``n`` and ``m``
    :type estimates: Sequence[OrbitEstimate]
    :param label: Input class of the data
    :type label: ModelKind | None
    :param replicate: Circuit replicate index
    :type replicate: int | None
    :returns: The ordered feature vector with its standard errors
    :rtype: FeatureVector
    :raises AssemblyError: On mixed sectors, duplicate or missing orbits
    """
    if not estimates:
        raise AssemblyError("no orbit estimates to assemble")

    sectors = {(e.orbit.n, e.orbit.m) for e in estimates}
    if len(sectors) != 1:
        raise AssemblyError(f"orbit estimates span several sectors: {sorted(sectors)}")
    n, m = sectors.pop()

    by_doubles: dict[int, OrbitEstimate] = {}
    for estimate in estimates:
        if estimate.orbit.d in by_doubles:
            raise AssemblyError(f"duplicate estimate for orbit {estimate.orbit.label}")
        by_doubles[estimate.orbit.d] = estimate

    expected = {o.d for o in feature_orbits(n, m)}
    if set(by_doubles) != expected:
        raise AssemblyError(f"sector n={n}, m={m} needs orbits with doubles {sorted(expected)}, got {sorted(by_doubles)}")

    values = tuple(by_doubles[d].value if d in by_doubles else 0.0 for d in ORBIT_DOUBLES)
    errors = tuple(by_doubles[d].std_error if d in by_doubles else 0.0 for d in ORBIT_DOUBLES)
    return FeatureVector(n=n, m=m, values=values, std_errors=errors, label=label, replicate=replicate)


def normalize_feature(feature: FeatureVector, norm: str = "euclidean") -> FeatureVector:
    """
    Scale a feature vector to unit Euclidean norm (or unit sum).

    :raises NormalizationError: For a zero vector or an unknown norm

    Examples
    --------
    >>> f = FeatureVector(n=4, m=16, values=(3.0, 4.0, 0.0))
    >>> normalize_feature(f).values
    (0.6, 0.8, 0.0)
    """
    values = feature.as_array()
    if norm == "euclidean":
        total = float(np.linalg.norm(values))
    elif norm == "unit_sum":
        total = float(values.sum())
    else:
        raise NormalizationError(f"unknown normalization '{norm}', expected one of {NORMALIZATIONS}")
    if total <= 0.0:
        raise NormalizationError(f"cannot normalize a zero feature vector (n={feature.n}, m={feature.m})")

    scaled = values / total
    errors = np.asarray(feature.std_errors) / total
    return feature.model_copy(
        update={
            "values": tuple(float(v) for v in scaled),
            "std_errors": tuple(float(e) for e in errors),
            "normalization": norm,
        }
    )


def _check_sector(a: FeatureVector, b: FeatureVector) -> None:
    if (a.n, a.m) != (b.n, b.m):
        raise SectorMismatchError(f"feature sectors differ: (n={a.n}, m={a.m}) vs (n={b.n}, m={b.m})")


def linear_kernel(f: FeatureVector, g: FeatureVector) -> float:
    """
    Scalar product of two feature vectors of the same sector.

    Examples
    --------
    >>> f = FeatureVector(n=4, m=16, values=(0.6, 0.8, 0.0))
    >>> g = FeatureVector(n=4, m=16, values=(0.8, 0.6, 0.0))
    >>> round(linear_kernel(f, g), 12)
    0.96
    """
    _check_sector(f, g)
    return float(np.dot(f.as_array(), g.as_array()))


def kernel_values(features: Sequence[FeatureVector]) -> np.ndarray:
    """All ``N(N-1)/2`` pairwise kernels of an ensemble, upper triangle in row order."""
    if len(features) < 2:
        raise DegenerateDatasetError(f"kernel statistics need at least 2 feature vectors, got {len(features)}")
    for f in features[1:]:
        _check_sector(features[0], f)
    x = np.vstack([f.as_array() for f in features])
    gram = x @ x.T
    rows, cols = np.triu_indices(len(features), k=1)
    return gram[rows, cols]


def kernel_stats(features: Sequence[FeatureVector], kind: ModelKind | None = None) -> KernelStats:
    """
    Mean and standard deviation of the pairwise kernels of an ensemble.

    :param features: ``N >= 2`` normalized feature vectors of one sector
    :type features: Sequence[FeatureVector]
    :param kind: Input class of the ensemble
    :type kind: ModelKind | None
    :returns: The statistics with ``pair_count = N(N-1)/2``
    :rtype: KernelStats
    :raises DegenerateDatasetError: If ``N < 2``
    :raises SectorMismatchError: If the vectors belong to different sectors
    """
    values = kernel_values(features)
    if kind is None:
        kind = features[0].label
    return KernelStats(
        mean=float(values.mean()),
        std=float(values.std()),
        pair_count=len(values),
        graphs=len(features),
        n=features[0].n,
        kind=kind,
    )


def kernel_separation(a: KernelStats, b: KernelStats, threshold: float = DEFAULT_KERNEL_THRESHOLD) -> KernelSeparation:
    """
    Compare two kernel ensembles of one sector.

    The separation is ``|mean_a - mean_b| / sqrt(std_a^2 + std_b^2)``; the
    ensembles are discriminated when it reaches ``threshold``.  The variance
    ratio ``std_b^2 / std_a^2`` is reported when ``std_a > 0``.

    :raises SectorMismatchError: If the statistics belong to different sectors

    Examples
    --------
    >>> a = KernelStats(mean=0.9, std=0.05, pair_count=1, graphs=2, n=4)
    >>> b = KernelStats(mean=0.6, std=0.05, pair_count=1, graphs=2, n=4)
    >>> report = kernel_separation(a, b)
    >>> round(report.separation, 2), report.discriminated
    (4.24, True)
    """
    if a.n != b.n:
        raise SectorMismatchError(f"kernel statistics belong to sectors n={a.n} and n={b.n}")

    gap = abs(a.mean - b.mean)
    spread = float(np.hypot(a.std, b.std))
    if spread > 0.0:
        separation = gap / spread
    else:
        separation = 0.0 if gap == 0.0 else float("inf")

    variance_ratio = (b.std**2 / a.std**2) if a.std > 0.0 else None

    return KernelSeparation(
        n=a.n,
        kind_a=a.kind,
        kind_b=b.kind,
        mean_a=a.mean,
        mean_b=b.mean,
        std_a=a.std,
        std_b=b.std,
        pair_count_a=a.pair_count,
        pair_count_b=b.pair_count,
        separation=separation,
        variance_ratio=variance_ratio,
        threshold=threshold,
        discriminated=bool(separation >= threshold),
    )


def kernel_convergence(features: Sequence[FeatureVector], counts: Sequence[int] | None = None) -> list[KernelStats]:
    """Kernel statistics of the first ``k`` graphs for increasing ``k``."""
    if counts is None:
        counts = range(2, len(features) + 1)
    return [kernel_stats(features[:k]) for k in counts]


def odd_sector_frequency(samples: SampleSet) -> float:
    """Fraction of samples with an odd total photon number."""
    if samples.sample_count == 0:
        return 0.0
    return float(np.count_nonzero(samples.totals() % 2 == 1)) / samples.sample_count
