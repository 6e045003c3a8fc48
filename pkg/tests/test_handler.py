import pytest
import json
import os
from pathlib import Path

from gbs_certify.cli import build_parser, main
from gbs_certify.handler import handler

from .conftest import small_config

EXPERIMENT_FILE = str(Path(__file__).parent / "experiment.yaml")


def _event(config, stage: str, **extra) -> dict:
    return {"Stage": stage, "Config": config.model_dump(mode="json"), **extra}


def test_handler_runs_a_single_stage(config_factory):
    config = config_factory()
    result = handler(_event(config, "generate"), None)

    assert "Response" in result, "Result should contain 'Response' key"
    response = result["Response"]
    assert response["Status"] == "GENERATE_COMPLETE"
    assert response["ConfigDigest"] == config.digest()
    assert response["OutputDir"] == config.output_dir

    summary = response["StageSummary"]
    assert summary["Stage"] == "generate"
    assert summary["FilesWritten"] == 2 * 3 * 5
    assert summary["FilesSkipped"] == 0
    assert "ErrorDetails" not in response


def test_handler_runs_every_stage(tmp_path):
    event = {
        "Stage": "all",
        "ConfigPath": EXPERIMENT_FILE,
        "OutputDir": str(tmp_path / "all"),
    }
    response = handler(event, None)["Response"]

    assert response["Status"] == "REPORT_COMPLETE"
    assert response["StagesCompleted"] == ["generate", "sample", "estimate", "kernels", "classify", "report"]
    assert [s["Stage"] for s in response["StageSummaries"]] == response["StagesCompleted"]
    assert os.path.isdir(tmp_path / "all" / "reports")


def test_handler_reports_the_missing_file(config_factory):
    config = config_factory()
    response = handler(_event(config, "sample"), None)["Response"]

    assert response["Status"] == "SAMPLE_FAILED"
    assert response["Message"].startswith("Stage failed (StageDependencyError)")
    details = response["ErrorDetails"]
    assert details["FailedStage"] == "sample"
    assert details["MissingFile"].endswith(".yaml")
    assert "StagesCompletedBeforeFailure" not in details


def test_handler_records_completed_stages_before_failure(config_factory):
    config = config_factory(photon_sectors=[4], circuits_per_class=2, max_hafnian_size=2)
    response = handler(_event(config, "all"), None)["Response"]

    # n=4 orbits need 4x4 hafnians, above the configured limit
    assert response["Status"] == "ESTIMATE_FAILED"
    details = response["ErrorDetails"]
    assert details["StagesCompletedBeforeFailure"] == ["generate", "sample"]
    assert details["FailedStage"] == "estimate"


@pytest.mark.parametrize(
    "event,field",
    [
        ({"invalid": "data"}, "Stage"),
        ({"Stage": "deploy", "ConfigPath": EXPERIMENT_FILE}, "Stage"),
        ({"Stage": "generate"}, ""),
    ],
)
def test_handler_rejects_bad_payloads(event, field):
    response = handler(event, None)["Response"]

    assert response["Status"] == "FAILED"
    assert response["Message"] == "Stage failed (ValidationError): StagePayload"
    errors = response["ErrorDetails"]["ValidationErrors"]
    assert any(e["Field"] == field for e in errors), errors
    assert "FailedStage" not in response["ErrorDetails"]


def test_handler_rejects_an_invalid_config(tmp_path):
    config = small_config(str(tmp_path)).model_dump(mode="json")
    config["photon_sectors"] = []
    response = handler({"Stage": "generate", "Config": config}, None)["Response"]

    assert response["Status"] == "FAILED"
    assert response["ErrorDetails"]["ValidationErrors"]


def test_parser_knows_every_stage():
    parser = build_parser()
    args = parser.parse_args(["estimate", "--config", "x.yaml", "--seed", "3", "--json-logs"])
    assert (args.stage, args.config, args.seed, args.json_logs) == ("estimate", "x.yaml", 3, True)
    with pytest.raises(SystemExit):
        parser.parse_args(["deploy", "--config", "x.yaml"])


def test_cli_success(tmp_path, capsys):
    code = main(["generate", "--config", EXPERIMENT_FILE, "--out-dir", str(tmp_path / "cli"), "--seed", "5"])
    assert code == 0

    response = json.loads(capsys.readouterr().out)
    assert response["Status"] == "GENERATE_COMPLETE"
    assert response["OutputDir"] == str(tmp_path / "cli")
    assert len(os.listdir(tmp_path / "cli" / "bundles")) == 2 * 2 * 5


def test_cli_failure(tmp_path, capsys):
    code = main(["kernels", "--config", EXPERIMENT_FILE, "--out-dir", str(tmp_path / "empty")])
    assert code == 1

    captured = capsys.readouterr()
    response = json.loads(captured.err[captured.err.index("{\n") :])
    assert response["Status"] == "KERNELS_FAILED"
    assert "MissingFile" in response["ErrorDetails"]
