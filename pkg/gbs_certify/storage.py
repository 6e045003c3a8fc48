"""
Artifact persistence.

Structured artifacts (bundles, estimates, kernel reports, models) are YAML
documents with sorted keys; samples are newline-delimited JSON with a header
object on the first line.  Every write goes to a temporary file in the target
directory and is moved into place with ``os.replace``.
"""

from enum import Enum
from typing import Any, Callable

import json
import os
import tempfile

import numpy as np
import structlog
import yaml

from .constants import SCHEMA_VERSION, V_CONFIG_FILE_JSON, V_CONFIG_FILE_YAML, V_CONFIG_FILE_YML
from .errors import ArtifactDigestError, ParameterError, StageDependencyError
from .models import ExperimentConfig, SampleSetHeader

log = structlog.get_logger(__name__)


def plain(value: Any) -> Any:
    """Convert numpy scalars, arrays and enums (recursively) into plain Python values."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def atomic_write_text(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and an atomic rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def dump_yaml(data: Any) -> str:
    return yaml.safe_dump(plain(data), sort_keys=True, default_flow_style=False, allow_unicode=True)


def write_yaml(path: str, data: dict) -> None:
    atomic_write_text(path, dump_yaml(data))
    log.debug("Wrote %s", path)


def read_yaml(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    return data or {}


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


# Readers for experiment configuration files, by extension
config_mapping: dict[str, Callable[[str], dict]] = {
    V_CONFIG_FILE_YAML: read_yaml,
    V_CONFIG_FILE_YML: read_yaml,
    V_CONFIG_FILE_JSON: read_json,
}


def read_config_file(path: str) -> dict:
    """
    Read an experiment configuration file, choosing the reader by extension.

    :param path: ``.yaml``, ``.yml`` or ``.json`` file
    :type path: str
    :returns: The raw configuration mapping
    :rtype: dict
    :raises ParameterError: If the extension is not supported
    :raises StageDependencyError: If the file does not exist
    """
    _, ext = os.path.splitext(path)
    reader = config_mapping.get(ext.lower())
    if reader is None:
        raise ParameterError(f"unsupported config file extension '{ext}' (expected one of {list(config_mapping)})")
    if not os.path.exists(path):
        raise StageDependencyError(f"config file not found: {path}", missing=path)
    return reader(path)


def artifact_header(config: ExperimentConfig, stage: str, seed_lineage: dict | None = None) -> dict:
    """Fields embedded in every structured artifact."""
    return {
        "schema_version": SCHEMA_VERSION,
        "config_digest": config.digest(),
        "stage": stage,
        "seed_lineage": seed_lineage or {},
    }


def write_samples(path: str, header: SampleSetHeader, samples: np.ndarray) -> None:
    """
    Write a sample file: the header object, then one JSON array of counts per line.
    """
    lines = [json.dumps(header.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))]
    lines.extend(json.dumps([int(c) for c in row], separators=(",", ":")) for row in samples)
    atomic_write_text(path, "\n".join(lines) + "\n")
    log.debug("Wrote %d samples to %s", len(samples), path)


def read_samples(path: str) -> tuple[SampleSetHeader, np.ndarray]:
    """Read a sample file written by :func:`write_samples`."""
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline()
        if not first.strip():
            raise ParameterError(f"sample file {path} has no header")
        header = SampleSetHeader(**json.loads(first))
        rows = [json.loads(line) for line in f if line.strip()]

    samples = np.asarray(rows, dtype=np.int64).reshape(len(rows), header.m)
    if samples.shape[0] != header.n_samples:
        raise ParameterError(f"sample file {path} holds {samples.shape[0]} rows, header declares {header.n_samples}")
    return header, samples


def read_artifact_digest(path: str) -> str | None:
    """Return the config digest embedded in a YAML, sample or report artifact."""
    if path.endswith(".ndjson"):
        with open(path, "r", encoding="utf-8") as f:
            return json.loads(f.readline()).get("config_digest")
    if path.endswith(".tsv"):
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                if not line.startswith("#"):
                    return None
                key, _, value = line[1:].partition(":")
                if key.strip() == "config_digest":
                    return value.strip()
        return None
    return read_yaml(path).get("config_digest")


def is_current(path: str, config: ExperimentConfig) -> bool:
    """True when ``path`` exists and was written for this configuration."""
    if not os.path.exists(path):
        return False
    try:
        return read_artifact_digest(path) == config.digest()
    except (OSError, ValueError, yaml.YAMLError):
        return False


def verify_artifact(path: str, config: ExperimentConfig) -> None:
    """
    Check the embedded config digest of an artifact against ``config``.

    :raises StageDependencyError: If the artifact is missing
    :raises ArtifactDigestError: If the digests differ

    Examples
    --------
    >>> verify_artifact("runs/default/bundles/smsv-n4-r000.yaml", ExperimentConfig())  # doctest: +SKIP
    """
    if not os.path.exists(path):
        raise StageDependencyError(f"artifact not found: {path}", missing=path)
    embedded = read_artifact_digest(path)
    expected = config.digest()
    if embedded != expected:
        raise ArtifactDigestError(f"artifact {path} has config digest {embedded}, expected {expected}")


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def write_tsv(path: str, columns: list[str], rows: list[list[Any]], preamble: dict | None = None) -> None:
    """
    Write a tab-separated series; floats keep full precision.

    ``preamble`` entries are written first as ``# key: value`` comment lines.
    """

    def _cell(value: Any) -> str:
        if value is None:
            return ""
        if isinstance(value, (float, np.floating)):
            return format_float(value)
        return str(value)

    lines = [f"# {key}: {value}" for key, value in (preamble or {}).items()]
    lines.append("\t".join(columns))
    lines.extend("\t".join(_cell(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")
    log.debug("Wrote %d rows to %s", len(rows), path)
