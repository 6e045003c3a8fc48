import pytest
import os

import numpy as np

from gbs_certify.constants import REPORT_SERIES, STAGES
from gbs_certify.errors import ArtifactDigestError, StageDependencyError
from gbs_certify.models import CircuitBundle, ModelKind
from gbs_certify.pipeline import (
    STAGE_RUNNERS,
    accuracy_path,
    apply_overrides,
    build_report_series,
    bundle_label,
    bundle_path,
    compile_bundles,
    estimate_path,
    expand_bundle_labels,
    kernel_report_path,
    load_bundle,
    load_model,
    model_path,
    report_path,
    run_estimate,
    run_generate,
    run_sample,
    samples_path,
    stage_seed,
)
from gbs_certify.storage import read_samples, read_yaml

from .conftest import small_config

def _run_all(config) -> dict:
    return {stage: STAGE_RUNNERS[stage](config) for stage in STAGES}


def _read(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


@pytest.fixture(scope="module")
def completed(tmp_path_factory):
    """One full run of the small experiment, shared by the read-only checks below."""
    config = small_config(str(tmp_path_factory.mktemp("pipeline") / "run"))
    results = _run_all(config)
    return config, results


def test_expand_bundle_labels():
    config = small_config("unused")
    keys = expand_bundle_labels(config)
    assert len(keys) == 2 * 3 * len(ModelKind)
    assert keys[0] == ("smsv-n2-r000", ModelKind.SMSV, 2, 0)
    assert keys[-1] == ("distinguishable_thermal-n4-r002", ModelKind.DISTINGUISHABLE_THERMAL, 4, 2)
    assert len({k[0] for k in keys}) == len(keys)


def test_bundle_label():
    assert bundle_label(ModelKind.COHERENT, 6, 12) == "coherent-n6-r012"


def test_stage_seeds_are_distinct():
    config = small_config("unused")
    seeds = {stage_seed(config, stage, 4, 0) for stage in STAGES}
    assert len(seeds) == len(STAGES)
    shifted = config.model_copy(update={"stage_seed_offset": 1})
    assert stage_seed(shifted, "sample", 4, 0) != stage_seed(config, "sample", 4, 0)


def test_apply_overrides(tmp_path):
    config = small_config(str(tmp_path / "a"))
    assert apply_overrides(config) is config
    changed = apply_overrides(config, output_dir=str(tmp_path / "b"), seed=9, stage_seed_offset=2)
    assert (changed.output_dir, changed.seed, changed.stage_seed_offset) == (str(tmp_path / "b"), 9, 2)
    assert changed.photon_sectors == config.photon_sectors


def test_matched_bundles_share_the_circuit():
    bundles = compile_bundles(small_config("unused"), 4, 1)
    assert set(bundles) == set(ModelKind)
    unitaries = [b.unitary() for b in bundles.values()]
    for u in unitaries[1:]:
        assert np.array_equal(u, unitaries[0])

    squeezing = np.asarray(bundles[ModelKind.SMSV].squeezing)
    assert np.allclose(bundles[ModelKind.THERMAL].mean_photons, np.sinh(squeezing) ** 2)
    assert np.allclose(np.abs(bundles[ModelKind.COHERENT].amplitudes()), np.sinh(squeezing))
    assert np.sum(np.sinh(squeezing) ** 2) == pytest.approx(4.0)


def test_graph_encoded_bundles():
    config = small_config("unused", photon_sectors=[4], squeezing={"mode": "graph", "edge_probability": 0.5})
    bundle = compile_bundles(config, 4, 0)[ModelKind.SMSV]
    assert bundle.graph_scale is not None and bundle.graph_scale > 0
    assert np.sum(np.sinh(np.asarray(bundle.squeezing)) ** 2) == pytest.approx(4.0, abs=1e-6)
    assert np.tanh(max(bundle.squeezing)) <= 0.95 + 1e-12


def test_every_stage_writes_its_outputs(completed):
    config, results = completed
    keys = expand_bundle_labels(config)

    for label, kind, _, _ in keys:
        assert os.path.exists(bundle_path(config, label))
        assert os.path.exists(estimate_path(config, label))
        assert os.path.exists(samples_path(config, label)) == (kind is not ModelKind.SMSV)

    assert os.path.exists(kernel_report_path(config))
    assert os.path.exists(model_path(config))
    assert os.path.exists(accuracy_path(config))
    for name in REPORT_SERIES:
        assert os.path.exists(report_path(config, name)), name

    assert results["generate"].summary["Bundles"] == len(keys)
    assert len(results["sample"].summary["NotSampled"]) == 2 * 3
    assert results["report"].summary["Series"] == REPORT_SERIES


def test_bundle_carries_digest_and_lineage(completed):
    config, _ = completed
    bundle = load_bundle(config, "thermal-n4-r001", "sample")
    assert isinstance(bundle, CircuitBundle)
    assert bundle.config_digest == config.digest()
    assert bundle.seed_lineage["stage"] == "generate"
    assert bundle.seed_lineage["keys"] == [4, 1]


def test_sample_files(completed):
    config, _ = completed
    header, rows = read_samples(samples_path(config, "coherent-n2-r000"))
    assert header.kind is ModelKind.COHERENT
    assert header.config_digest == config.digest()
    assert rows.shape == (config.sample_count, 4)
    assert np.all(rows >= 0)


def test_estimate_records(completed):
    config, _ = completed
    genuine = read_yaml(estimate_path(config, "smsv-n4-r000"))
    assert genuine["photon_number"]["source"] == "exact"
    assert genuine["odd_sector_frequency"] == pytest.approx(0.0, abs=1e-12)
    assert [e["method"] for e in genuine["estimates"]] == ["monte_carlo"] * 3
    assert len(genuine["feature"]["values"]) == 3

    mockup = read_yaml(estimate_path(config, "thermal-n4-r000"))
    assert mockup["photon_number"]["source"] == "samples"
    assert sum(mockup["photon_number"]["probabilities"]) == pytest.approx(1.0)
    assert mockup["odd_sector_frequency"] > 0.0

    # n=2 admits no pattern with two doubled modes
    small = read_yaml(estimate_path(config, "thermal-n2-r000"))
    assert small["feature"]["values"][2] == 0.0


def test_odd_totals_vanish_for_paired_sources(completed):
    config, _ = completed
    for label, kind, _, _ in expand_bundle_labels(config):
        odd = read_yaml(estimate_path(config, label))["odd_sector_frequency"]
        if kind.emits_pairs:
            assert odd == pytest.approx(0.0, abs=1e-12), label
        else:
            assert odd > 0.0, label


def test_kernel_report(completed):
    config, _ = completed
    report = read_yaml(kernel_report_path(config))
    assert report["normalization"] == "euclidean"
    assert len(report["stats"]) == 2 * len(ModelKind)
    assert len(report["separations"]) == 2 * (len(ModelKind) - 1)
    for s in report["separations"]:
        assert s["kind_a"] == "smsv"
        assert s["separation"] >= 0.0
    for s in report["stats"]:
        assert 0.0 <= s["mean"] <= 1.0 + 1e-12
        assert s["pair_count"] == 3


def test_classifier_outputs(completed):
    config, results = completed
    accuracy = read_yaml(accuracy_path(config))
    assert 0.0 <= accuracy["overall"]["accuracy"] <= 1.0
    assert {row["n"] for row in accuracy["heldout"]} <= {2, 4}
    assert [row["n"] for row in accuracy["generalization"]] == [4]
    assert accuracy["generalization"][0]["train_sectors"] == [2]
    assert accuracy["generalization"][0]["repeats"] == 2

    model = load_model(config)
    assert model.hidden == (8, 4)
    assert results["classify"].summary["HeldOutAccuracy"] == accuracy["overall"]["accuracy"]


def test_report_series_layout(completed):
    config, _ = completed
    with open(report_path(config, "kernel_histograms"), "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0] == f"# config_digest: {config.digest()}"
    assert lines[1] == "# stage: report"
    assert lines[2].split("\t") == ["n", "kind", "bin_low", "bin_high", "count"]
    rows = [line.split("\t") for line in lines[3:]]
    assert len(rows) == 2 * len(ModelKind) * config.histogram_bins
    smsv_n2 = [r for r in rows if r[0] == "2" and r[1] == "smsv"]
    assert 0 < sum(int(r[4]) for r in smsv_n2) <= 3


def test_report_covers_every_series(completed):
    config, _ = completed
    series = build_report_series(config)
    assert list(series) == REPORT_SERIES
    for name, (columns, rows) in series.items():
        assert rows, name
        assert all(len(row) == len(columns) for row in rows), name


def test_second_run_writes_nothing(completed):
    config, _ = completed
    again = _run_all(config)
    for stage, result in again.items():
        assert result.written == [], stage
        assert result.skipped, stage


def test_results_do_not_depend_on_worker_count(tmp_path):
    one = small_config(str(tmp_path / "one"), photon_sectors=[4], circuits_per_class=2, workers=1)
    three = small_config(str(tmp_path / "three"), photon_sectors=[4], circuits_per_class=2, workers=3)
    _run_all(one)
    _run_all(three)

    for label, _, _, _ in expand_bundle_labels(one):
        assert _read(estimate_path(one, label)) == _read(estimate_path(three, label)), label
    for name in REPORT_SERIES:
        assert _read(report_path(one, name)) == _read(report_path(three, name)), name


def test_stage_needs_its_inputs(config_factory):
    config = config_factory()
    with pytest.raises(StageDependencyError) as info:
        run_sample(config)
    assert info.value.missing.endswith(".yaml")
    with pytest.raises(StageDependencyError):
        run_estimate(config)


def test_stale_artifacts_are_rejected(config_factory):
    config = config_factory()
    run_generate(config)
    changed = apply_overrides(config, seed=config.seed + 1)
    with pytest.raises(ArtifactDigestError):
        run_sample(changed)


def test_changed_config_regenerates(config_factory):
    config = config_factory(photon_sectors=[2], circuits_per_class=2)
    first = run_generate(config)
    assert len(first.written) == 2 * len(ModelKind)
    changed = apply_overrides(config, stage_seed_offset=1)
    second = run_generate(changed)
    assert len(second.written) == 2 * len(ModelKind)
    assert second.skipped == []
