import pytest
import json
import os

import numpy as np

from gbs_certify.errors import ArtifactDigestError, ParameterError, StageDependencyError
from gbs_certify.models import ExperimentConfig, ModelKind, SampleSetHeader
from gbs_certify.storage import (
    artifact_header,
    dump_yaml,
    is_current,
    plain,
    read_artifact_digest,
    read_config_file,
    read_samples,
    read_yaml,
    verify_artifact,
    write_samples,
    write_tsv,
    write_yaml,
)


@pytest.fixture
def config(tmp_path) -> ExperimentConfig:
    return ExperimentConfig(photon_sectors=[4], circuits_per_class=2, output_dir=str(tmp_path))


def _header(config: ExperimentConfig, n_samples: int, m: int = 3) -> SampleSetHeader:
    return SampleSetHeader(
        label="thermal-n4-r000",
        kind=ModelKind.THERMAL,
        parameter_digest="abc",
        m=m,
        n_samples=n_samples,
        seed=5,
        config_digest=config.digest(),
    )


def test_plain_converts_numpy_and_enums():
    data = {"a": np.float64(1.5), "b": np.arange(3), "c": ModelKind.COHERENT, "d": (np.int64(2), np.bool_(True))}
    assert plain(data) == {"a": 1.5, "b": [0, 1, 2], "c": "coherent", "d": [2, True]}


def test_yaml_keys_are_sorted():
    text = dump_yaml({"zeta": 1, "alpha": 2})
    assert text.index("alpha") < text.index("zeta")


def test_write_yaml_creates_directories(tmp_path):
    path = tmp_path / "nested" / "deeper" / "doc.yaml"
    write_yaml(str(path), {"value": np.float64(0.25)})
    assert read_yaml(str(path)) == {"value": 0.25}
    leftovers = [p for p in os.listdir(path.parent) if p.startswith(".tmp-")]
    assert leftovers == []


def test_sample_file_layout(tmp_path, config):
    path = str(tmp_path / "samples.ndjson")
    samples = np.array([[0, 1, 2], [3, 0, 0]])
    write_samples(path, _header(config, 2), samples)

    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert len(lines) == 3
    assert json.loads(lines[0])["kind"] == "thermal"
    assert lines[1] == "[0,1,2]"

    header, rows = read_samples(path)
    assert header.n_samples == 2
    assert np.array_equal(rows, samples)


def test_sample_file_row_count_check(tmp_path, config):
    path = str(tmp_path / "samples.ndjson")
    write_samples(path, _header(config, 5), np.zeros((2, 3), dtype=int))
    with pytest.raises(ParameterError):
        read_samples(path)


@pytest.mark.parametrize("name", ["exp.yaml", "exp.yml", "exp.json"])
def test_read_config_file_formats(tmp_path, name):
    path = tmp_path / name
    data = {"photon_sectors": [4], "circuits_per_class": 2}
    if name.endswith(".json"):
        path.write_text(json.dumps(data))
    else:
        path.write_text(dump_yaml(data))
    assert read_config_file(str(path)) == data


def test_read_config_file_errors(tmp_path):
    with pytest.raises(ParameterError):
        read_config_file(str(tmp_path / "exp.toml"))
    with pytest.raises(StageDependencyError) as info:
        read_config_file(str(tmp_path / "missing.yaml"))
    assert info.value.missing.endswith("missing.yaml")


def test_artifact_digest_in_every_format(tmp_path, config):
    yaml_path = str(tmp_path / "a.yaml")
    write_yaml(yaml_path, {**artifact_header(config, "kernels"), "x": 1})

    sample_path = str(tmp_path / "a.ndjson")
    write_samples(sample_path, _header(config, 1), np.zeros((1, 3), dtype=int))

    tsv_path = str(tmp_path / "a.tsv")
    write_tsv(tsv_path, ["n", "value"], [[4, 0.5]], preamble={"config_digest": config.digest()})

    for path in (yaml_path, sample_path, tsv_path):
        assert read_artifact_digest(path) == config.digest(), path
        assert is_current(path, config)
        verify_artifact(path, config)


def test_verify_artifact_detects_stale_digest(tmp_path, config):
    path = str(tmp_path / "a.yaml")
    write_yaml(path, artifact_header(config, "generate"))
    changed = config.model_copy(update={"mc_draws": config.mc_draws + 1})
    assert not is_current(path, changed)
    with pytest.raises(ArtifactDigestError):
        verify_artifact(path, changed)


def test_verify_artifact_missing_file(tmp_path, config):
    with pytest.raises(StageDependencyError):
        verify_artifact(str(tmp_path / "nope.yaml"), config)
    assert not is_current(str(tmp_path / "nope.yaml"), config)


def test_write_tsv_precision_and_blanks(tmp_path):
    path = tmp_path / "series.tsv"
    write_tsv(str(path), ["a", "b", "c"], [[0.1, None, "x"]], preamble={"config_digest": "d"})
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_digest: d"
    assert lines[1] == "a\tb\tc"
    assert lines[2] == "0.10000000000000001\t\tx"


def test_config_digest_ignores_location_and_workers(tmp_path):
    a = ExperimentConfig(output_dir=str(tmp_path / "a"), workers=1)
    b = ExperimentConfig(output_dir=str(tmp_path / "b"), workers=4)
    c = ExperimentConfig(output_dir=str(tmp_path / "a"), seed=1)
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
