import pytest
import numpy as np

from gbs_certify.constants import GENERATOR_VERSION, SAMPLE_BLOCK_SIZE
from gbs_certify.errors import DimensionError, ParameterError, SizeLimitError
from gbs_certify.gaussian import GaussianModel, exact_distribution, matched_models
from gbs_certify.linalg import haar_unitary
from gbs_certify.models import ModelKind
from gbs_certify.samplers import (
    SampleSet,
    generate_blocks,
    sample_coherent,
    sample_distinguishable_smsv,
    sample_gbs_bruteforce,
    sample_model,
    sample_thermal,
    source_cutoff,
)


@pytest.fixture(scope="module")
def models() -> dict:
    circuit = haar_unitary(4, seed=2)
    squeezing = np.array([0.4, 0.3, 0.5, 0.2])
    return matched_models(circuit, squeezing, phases=np.array([0.0, 0.5, 1.0, 1.5]))


def _frequency(samples: np.ndarray, pattern: tuple[int, ...]) -> float:
    return float(np.mean(np.all(samples == np.asarray(pattern), axis=1)))


@pytest.mark.parametrize("kind", list(ModelKind))
def test_sample_sets_are_reproducible(models, kind):
    a = sample_model(models[kind], 600, seed=17, n_max=4)
    b = sample_model(models[kind], 600, seed=17, n_max=4)
    c = sample_model(models[kind], 600, seed=18, n_max=4)
    assert np.array_equal(a.samples, b.samples), f"{kind.value} is not reproducible"
    assert not np.array_equal(a.samples, c.samples)
    assert a.samples.shape == (600, 4)
    assert a.generator == GENERATOR_VERSION


@pytest.mark.parametrize("kind", list(ModelKind))
def test_sample_sets_do_not_depend_on_worker_count(models, kind):
    n_samples = 3 * SAMPLE_BLOCK_SIZE + 17
    serial = sample_model(models[kind], n_samples, seed=5, workers=1, n_max=4)
    threaded = sample_model(models[kind], n_samples, seed=5, workers=4, n_max=4)
    assert np.array_equal(serial.samples, threaded.samples)


@pytest.mark.parametrize(
    "kind",
    [ModelKind.THERMAL, ModelKind.COHERENT, ModelKind.DISTINGUISHABLE_SMSV, ModelKind.DISTINGUISHABLE_THERMAL],
)
def test_sample_mean_photon_number(models, kind):
    model = models[kind]
    samples = sample_model(model, 20000, seed=3)
    totals = samples.totals()
    expected = model.mean_photon_number()
    assert abs(totals.mean() - expected) < 5 * totals.std() / np.sqrt(len(totals)) + 1e-3


@pytest.mark.parametrize(
    "kind",
    [ModelKind.THERMAL, ModelKind.COHERENT, ModelKind.DISTINGUISHABLE_SMSV, ModelKind.DISTINGUISHABLE_THERMAL],
)
def test_sample_frequencies_match_exact_law(models, kind):
    model = models[kind]
    n_samples = 20000
    samples = sample_model(model, n_samples, seed=9).samples
    for pattern, p in exact_distribution(model, 2).items():
        sigma = np.sqrt(max(p * (1 - p), 1e-6) / n_samples)
        assert abs(_frequency(samples, pattern) - p) < 5 * sigma + 1e-3, f"{kind.value} pattern {pattern}"


def test_bruteforce_sampler_matches_exact_law(models):
    model = models[ModelKind.SMSV]
    samples = sample_gbs_bruteforce(model.circuit, model.squeezing, 20000, seed=4, n_max=4)
    assert np.all(samples.totals() % 2 == 0)
    assert 0.0 < samples.truncation["deficit"] < 0.1
    exact = exact_distribution(model, 2)
    scale = 1.0 - samples.truncation["deficit"]
    for pattern, p in exact.items():
        q = p / scale
        sigma = np.sqrt(max(q * (1 - q), 1e-6) / 20000)
        assert abs(_frequency(samples.samples, pattern) - q) < 5 * sigma + 1e-3


def test_bruteforce_sampler_size_limit():
    with pytest.raises(SizeLimitError):
        sample_gbs_bruteforce(np.eye(36), np.full(36, 0.1), 10, seed=1, n_max=8)


def test_sample_model_needs_n_max_for_squeezed_vacuum(models):
    with pytest.raises(ParameterError):
        sample_model(models[ModelKind.SMSV], 10, seed=1)


def test_zero_intensity_sources_emit_nothing():
    assert sample_thermal(np.eye(3), np.zeros(3), 50, seed=1).samples.sum() == 0
    assert sample_coherent(np.eye(3), np.zeros(3), 50, seed=1).samples.sum() == 0


def test_distinguishable_squeezed_totals_are_even():
    samples = sample_distinguishable_smsv(haar_unitary(3, seed=1), np.array([0.6, 0.2, 0.4]), 2000, seed=2)
    assert np.all(samples.totals() % 2 == 0)
    assert samples.truncation["residual_in_cutoff_bin"] is True
    assert all(c % 2 == 0 for c in samples.truncation["cutoffs"])


@pytest.mark.parametrize("kind,parameter", [(ModelKind.DISTINGUISHABLE_SMSV, 0.8), (ModelKind.THERMAL, 2.0)])
def test_source_cutoff_tail_below_threshold(kind, parameter):
    dist = source_cutoff(kind, parameter, tail_mass=1e-9)
    assert dist.tail_mass < 1e-9
    assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-8)


def test_generate_blocks_rejects_empty_request():
    with pytest.raises(ParameterError):
        generate_blocks(0, 1, 2, lambda rng, size: np.zeros((size, 2)))


def test_sample_set_validates_shape():
    with pytest.raises(DimensionError):
        SampleSet(kind=ModelKind.THERMAL, parameter_digest="x", seed=0, m=3, samples=np.zeros((4, 2)))
    with pytest.raises(ParameterError):
        SampleSet(kind=ModelKind.THERMAL, parameter_digest="x", seed=0, m=2, samples=-np.ones((4, 2)))


def test_sample_set_header_round_trip(models):
    samples = sample_model(models[ModelKind.COHERENT], 40, seed=6)
    header = samples.header(label="coherent-n4-r000", config_digest="abc", seed_lineage={"seed": 6})
    assert header.n_samples == 40
    assert header.parameter_digest == models[ModelKind.COHERENT].digest()
    rebuilt = SampleSet.from_header(header, samples.samples)
    assert rebuilt.kind is ModelKind.COHERENT
    assert rebuilt.seed == 6
