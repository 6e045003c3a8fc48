"""
Data models shared across the package.

Value records (orbits, estimates, feature vectors, kernel statistics) and the
file-facing records (circuit bundles, sample headers, experiment configuration
and stage payloads) are pydantic models so that every artifact written to disk
is validated on the way back in.
"""

from enum import Enum
from typing import Any, Literal

import hashlib
import json

import numpy as np

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic.alias_generators import to_pascal

from .constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_CIRCUITS_PER_CLASS,
    DEFAULT_EPOCHS,
    DEFAULT_HIDDEN,
    DEFAULT_HISTOGRAM_BINS,
    DEFAULT_KERNEL_THRESHOLD,
    DEFAULT_LEARNING_RATE,
    DEFAULT_MC_DRAWS,
    DEFAULT_MOMENTUM,
    DEFAULT_PHOTON_SECTORS,
    DEFAULT_REPEATS,
    DEFAULT_SAMPLE_COUNT,
    DEFAULT_SEED,
    DEFAULT_TEST_FRACTION,
    GENERATOR_VERSION,
    ORBIT_DOUBLES,
    SCHEMA_VERSION,
    STAGES,
)


class ModelKind(str, Enum):
    """Input-state classes: the genuine sampler and the four mock-ups."""

    SMSV = "smsv"
    THERMAL = "thermal"
    COHERENT = "coherent"
    DISTINGUISHABLE_SMSV = "distinguishable_smsv"
    DISTINGUISHABLE_THERMAL = "distinguishable_thermal"

    @property
    def emits_pairs(self) -> bool:
        return self in (ModelKind.SMSV, ModelKind.DISTINGUISHABLE_SMSV)

    @property
    def is_genuine(self) -> bool:
        return self is ModelKind.SMSV


ALL_KINDS = list(ModelKind)


class EstimateMethod(str, Enum):
    EMPIRICAL = "empirical"
    MONTE_CARLO = "monte_carlo"
    EXACT = "exact"


class OrbitId(BaseModel):
    """
    Canonical orbit ``[2]*d + [1]*(n-2d) + [0]*...`` over ``m`` modes.

    Only ``d`` in ``{0, 1, 2}`` is in scope.  Whether the canonical pattern fits
    in ``m`` modes is checked by the orbit operations, which raise ``OrbitError``.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=0)
    d: int
    m: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_doubles(self) -> "OrbitId":
        if self.d not in ORBIT_DOUBLES:
            raise ValueError(f"orbit doubles must be one of {ORBIT_DOUBLES}, got {self.d}")
        if self.n - 2 * self.d < 0:
            raise ValueError(f"orbit with n={self.n} cannot hold {self.d} doubled modes")
        return self

    @property
    def singles(self) -> int:
        return self.n - 2 * self.d

    @property
    def occupied(self) -> int:
        return self.d + self.singles

    @property
    def label(self) -> str:
        head = ["2"] * self.d + ["1"] * self.singles
        return "[" + ",".join(head) + "]"


class OrbitEstimate(BaseModel):
    orbit: OrbitId
    value: float = Field(ge=0.0, le=1.0 + 1e-9)
    std_error: float = Field(ge=0.0)
    method: EstimateMethod
    draws_or_samples: int = Field(ge=0)
    seed: int | None = None


class FeatureVector(BaseModel):
    """
    Orbit-probability triple ``([1,...,1], [2,1,...,1], [2,2,1,...,1])`` at a fixed ``n``.
    """

    n: int = Field(ge=0)
    m: int = Field(ge=1)
    values: tuple[float, float, float]
    std_errors: tuple[float, float, float] = (0.0, 0.0, 0.0)
    label: ModelKind | None = None
    replicate: int | None = None
    normalization: str | None = None

    @field_validator("values")
    @classmethod
    def _non_negative(cls, v: tuple[float, float, float]) -> tuple[float, float, float]:
        if any(x < 0 or not np.isfinite(x) for x in v):
            raise ValueError(f"feature values must be finite and non-negative: {v}")
        return v

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


class KernelStats(BaseModel):
    mean: float
    std: float = Field(ge=0.0)
    pair_count: int = Field(ge=1)
    graphs: int = Field(ge=2)
    n: int
    kind: ModelKind | None = None

    @model_validator(mode="after")
    def _check_pairs(self) -> "KernelStats":
        if self.pair_count != self.graphs * (self.graphs - 1) // 2:
            raise ValueError("pair_count must equal graphs*(graphs-1)/2")
        return self


class KernelSeparation(BaseModel):
    n: int
    kind_a: ModelKind | None
    kind_b: ModelKind | None
    mean_a: float
    mean_b: float
    std_a: float
    std_b: float
    pair_count_a: int
    pair_count_b: int
    separation: float
    variance_ratio: float | None
    threshold: float
    discriminated: bool


class SampleSetHeader(BaseModel):
    """Header object written as the first line of a sample file."""

    schema_version: int = SCHEMA_VERSION
    label: str | None = None
    kind: ModelKind
    parameters: dict[str, Any] = {}
    parameter_digest: str
    m: int = Field(ge=1)
    n_samples: int = Field(ge=0)
    seed: int
    generator: str = GENERATOR_VERSION
    truncation: dict[str, Any] = {}
    config_digest: str | None = None
    seed_lineage: dict[str, Any] = {}


class CircuitBundle(BaseModel):
    """Persisted circuit and source parameters for one (kind, n, replicate)."""

    schema_version: int = SCHEMA_VERSION
    label: str
    kind: ModelKind
    n: int
    m: int
    replicate: int
    unitary_real: list[list[float]]
    unitary_imag: list[list[float]]
    squeezing: list[float] | None = None
    mean_photons: list[float] | None = None
    amplitudes_real: list[float] | None = None
    amplitudes_imag: list[float] | None = None
    phases: list[float] | None = None
    graph_scale: float | None = None
    target_mean_photons: float
    circuit_seed: int
    config_digest: str
    seed_lineage: dict[str, Any] = {}

    def unitary(self) -> np.ndarray:
        return np.asarray(self.unitary_real) + 1j * np.asarray(self.unitary_imag)

    def amplitudes(self) -> np.ndarray | None:
        if self.amplitudes_real is None or self.amplitudes_imag is None:
            return None
        return np.asarray(self.amplitudes_real) + 1j * np.asarray(self.amplitudes_imag)


class SqueezingSettings(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    mode: Literal["uniform", "explicit", "graph"] = "uniform"
    mean_photons: float | None = Field(default=None, ge=0.0)
    values: list[float] | None = None
    edge_probability: float = Field(default=0.5, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_mode(self) -> "SqueezingSettings":
        if self.mode == "explicit":
            if not self.values:
                raise ValueError("explicit squeezing requires 'values'")
            if any(v < 0 or not np.isfinite(v) for v in self.values):
                raise ValueError("squeezing values must be finite and non-negative")
        return self


class ClassifierSettings(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    hidden: list[int] = Field(default_factory=lambda: list(DEFAULT_HIDDEN))
    epochs: int = Field(default=DEFAULT_EPOCHS, ge=0)
    learning_rate: float = Field(default=DEFAULT_LEARNING_RATE, gt=0.0)
    momentum: float = Field(default=DEFAULT_MOMENTUM, ge=0.0, lt=1.0)
    batch_size: int = Field(default=DEFAULT_BATCH_SIZE, ge=2)
    test_fraction: float = Field(default=DEFAULT_TEST_FRACTION, gt=0.0, lt=1.0)
    feature_transform: Literal["log", "raw"] = "log"
    train_sectors: list[int] | None = None
    test_sectors: list[int] | None = None
    repeats: int = Field(default=DEFAULT_REPEATS, ge=1)

    @field_validator("hidden")
    @classmethod
    def _two_widths(cls, v: list[int]) -> list[int]:
        if len(v) != 2 or any(w < 1 for w in v):
            raise ValueError(f"hidden must be two positive widths, got {v}")
        return v


class ExperimentConfig(BaseModel):
    """
    Experiment layout for the whole stage graph.

    Examples
    --------
    >>> config = ExperimentConfig(photon_sectors=[4], circuits_per_class=3)
    >>> config.modes_for(4)
    16
    """

    model_config = ConfigDict(populate_by_name=True)

    name: str = "gbs-certify"
    mode_rule: Literal["square", "fixed"] = "square"
    modes: int | None = Field(default=None, ge=1)
    photon_sectors: list[int] = Field(default_factory=lambda: list(DEFAULT_PHOTON_SECTORS))
    circuits_per_class: int = Field(default=DEFAULT_CIRCUITS_PER_CLASS, ge=1)
    model_kinds: list[ModelKind] = Field(default_factory=lambda: list(ALL_KINDS))
    squeezing: SqueezingSettings = Field(default_factory=SqueezingSettings)
    sample_count: int = Field(default=DEFAULT_SAMPLE_COUNT, ge=1)
    mc_draws: int = Field(default=DEFAULT_MC_DRAWS, ge=1)
    max_hafnian_size: int = Field(default=16, ge=2)
    gbs_estimator: Literal["monte_carlo", "bruteforce"] = "monte_carlo"
    normalization: Literal["euclidean", "unit_sum"] = "euclidean"
    classifier: ClassifierSettings = Field(default_factory=ClassifierSettings)
    kernel_threshold: float = Field(default=DEFAULT_KERNEL_THRESHOLD, gt=0.0)
    histogram_bins: int = Field(default=DEFAULT_HISTOGRAM_BINS, ge=1)
    seed: int = DEFAULT_SEED
    stage_seed_offset: int = 0
    output_dir: str = "runs/default"
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_layout(self) -> "ExperimentConfig":
        if not self.photon_sectors:
            raise ValueError("photon_sectors must not be empty")
        if any(n < 1 for n in self.photon_sectors):
            raise ValueError("photon sectors must be positive")
        if len(set(self.photon_sectors)) != len(self.photon_sectors):
            raise ValueError("photon sectors must be unique")
        if not self.model_kinds:
            raise ValueError("model_kinds must not be empty")
        if len(set(self.model_kinds)) != len(self.model_kinds):
            raise ValueError("model_kinds must be unique")
        if self.mode_rule == "fixed":
            if self.modes is None:
                raise ValueError("mode_rule 'fixed' requires 'modes'")
            if self.modes < max(self.photon_sectors):
                raise ValueError("fixed mode count must be at least the largest photon sector")
        if self.squeezing.mode == "explicit":
            for n in self.photon_sectors:
                if len(self.squeezing.values) != self.modes_for(n):
                    raise ValueError(
                        f"explicit squeezing has {len(self.squeezing.values)} values, "
                        f"sector n={n} has {self.modes_for(n)} modes"
                    )
        return self

    def modes_for(self, n: int) -> int:
        return n * n if self.mode_rule == "square" else int(self.modes)

    def target_mean_photons(self, n: int) -> float:
        if self.squeezing.mean_photons is not None:
            return float(self.squeezing.mean_photons)
        return float(n)

    def digest(self) -> str:
        """SHA-256 of the canonical config dump; output location and worker count are excluded."""
        data = self.model_dump(mode="json", exclude={"output_dir", "workers"})
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class StagePayload(BaseModel):
    """
    Event accepted by the stage handler.

    Accepts PascalCase keys (``Stage``, ``ConfigPath``, ``OutputDir``, ...) or
    the snake_case field names.
    """

    model_config = ConfigDict(populate_by_name=True, alias_generator=to_pascal)

    stage: str
    config: ExperimentConfig | None = None
    config_path: str | None = None
    output_dir: str | None = None
    seed: int | None = None
    stage_seed_offset: int | None = None
    log_level: str | None = None

    @field_validator("stage")
    @classmethod
    def _known_stage(cls, v: str) -> str:
        if v not in STAGES and v != "all":
            raise ValueError(f"unknown stage '{v}', expected one of {STAGES + ['all']}")
        return v

    @model_validator(mode="after")
    def _config_source(self) -> "StagePayload":
        if self.config is None and not self.config_path:
            raise ValueError("either Config or ConfigPath is required")
        return self
