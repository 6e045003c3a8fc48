import pytest

from gbs_certify.models import ExperimentConfig


def pytest_addoption(parser):
    parser.addoption(
        "--desk-scale",
        action="store_true",
        default=False,
        help="Run the desk-scale acceptance experiment (minutes of CPU time)",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "desk_scale: full-size acceptance experiment")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--desk-scale"):
        return
    skip = pytest.mark.skip(reason="needs --desk-scale")
    for item in items:
        if "desk_scale" in item.keywords:
            item.add_marker(skip)


def small_config(output_dir: str, **overrides) -> ExperimentConfig:
    """A two-sector experiment small enough for the unit test run."""
    settings = {
        "name": "unit-test",
        "photon_sectors": [2, 4],
        "circuits_per_class": 3,
        "sample_count": 400,
        "mc_draws": 60,
        "classifier": {"hidden": [8, 4], "epochs": 5, "batch_size": 8, "repeats": 2},
        "histogram_bins": 10,
        "seed": 2024,
        "output_dir": output_dir,
    }
    settings.update(overrides)
    return ExperimentConfig(**settings)


@pytest.fixture
def config_factory(tmp_path):
    def _make(name: str = "run", **overrides) -> ExperimentConfig:
        return small_config(str(tmp_path / name), **overrides)

    return _make
