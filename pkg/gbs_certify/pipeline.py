"""Description: Run the experiment stage graph.

- Expands the experiment configuration into labelled circuit bundles, one per
  (model kind, photon sector, replicate)
- Samples, estimates orbit probabilities and assembles feature vectors
- Computes kernel statistics, trains and evaluates the classifier
- Emits plain-text report series

Every artifact embeds the config digest and its seed lineage.  A stage skips an
output whose file already carries the current digest.
"""

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import os
import numpy as np
import structlog

from .classifier import (
    TEST,
    LabeledDataset,
    MlpModel,
    generalization_protocol,
    mlp_eval,
    mlp_init,
    mlp_train,
)
from .constants import (
    REPORT_SERIES,
    STAGE_CLASSIFY,
    STAGE_ESTIMATE,
    STAGE_GENERATE,
    STAGE_KERNELS,
    STAGE_REPORT,
    STAGE_SAMPLE,
    STAGES,
    V_ACCURACY_FILE,
    V_BUNDLE_SUFFIX,
    V_BUNDLES_DIR,
    V_CLASSIFY_DIR,
    V_ESTIMATE_SUFFIX,
    V_ESTIMATES_DIR,
    V_KERNEL_REPORT_FILE,
    V_KERNELS_DIR,
    V_MODEL_FILE,
    V_REPORT_SUFFIX,
    V_REPORTS_DIR,
    V_SAMPLES_DIR,
    V_SAMPLES_SUFFIX,
)
from .errors import NormalizationError, StageDependencyError
from .features import (
    feature_orbits,
    feature_vector,
    kernel_convergence,
    kernel_separation,
    kernel_stats,
    kernel_values,
    normalize_feature,
    odd_sector_frequency,
)
from .gaussian import coherent_phases, matched_models, model_from_bundle, total_photon_distribution
from .linalg import derive_seed, encode_graph, haar_unitary, random_graph, uniform_squeezing
from .models import (
    CircuitBundle,
    ExperimentConfig,
    FeatureVector,
    KernelSeparation,
    KernelStats,
    ModelKind,
)
from .orbits import empirical_orbit_probs, mc_orbit_estimate
from .samplers import SampleSet, sample_model
from .storage import (
    artifact_header,
    is_current,
    read_config_file,
    read_samples,
    read_yaml,
    verify_artifact,
    write_samples,
    write_tsv,
    write_yaml,
)

log = structlog.get_logger(__name__)

BundleKey = tuple[str, ModelKind, int, int]

KIND_INDEX = {kind: i for i, kind in enumerate(ModelKind)}


@dataclass
class StageResult:
    """Outcome of one stage: files written, files already current, and a summary."""

    stage: str
    written: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)

    def as_summary(self) -> dict:
        return {
            "Stage": self.stage,
            "FilesWritten": len(self.written),
            "FilesSkipped": len(self.skipped),
            **self.summary,
        }


def load_config(path: str) -> ExperimentConfig:
    """
    Load an experiment configuration from a YAML or JSON file.

    :param path: Config file path
    :type path: str
    :returns: The validated configuration
    :rtype: ExperimentConfig
    :raises pydantic.ValidationError: If the file content is invalid
    """
    log.info("Loading experiment config %s", path)
    return ExperimentConfig.model_validate(read_config_file(path))


def apply_overrides(
    config: ExperimentConfig,
    output_dir: str | None = None,
    seed: int | None = None,
    stage_seed_offset: int | None = None,
) -> ExperimentConfig:
    """Return a re-validated copy of ``config`` with command-line overrides applied."""
    updates = {
        key: value
        for key, value in (("output_dir", output_dir), ("seed", seed), ("stage_seed_offset", stage_seed_offset))
        if value is not None
    }
    if not updates:
        return config
    return ExperimentConfig.model_validate({**config.model_dump(), **updates})


def stage_seed(config: ExperimentConfig, stage: str, *keys: int) -> int:
    """Seed for one unit of work, derived from the master seed, the stage and its offset."""
    return derive_seed(config.seed, STAGES.index(stage), config.stage_seed_offset, *keys)


def seed_lineage(config: ExperimentConfig, stage: str, *keys: int) -> dict:
    return {
        "master_seed": config.seed,
        "stage": stage,
        "stage_index": STAGES.index(stage),
        "stage_seed_offset": config.stage_seed_offset,
        "keys": [int(k) for k in keys],
        "seed": stage_seed(config, stage, *keys),
    }


def bundle_label(kind: ModelKind, n: int, replicate: int) -> str:
    """
    Label of one circuit bundle.

    Examples
    --------
    >>> bundle_label(ModelKind.THERMAL, 4, 7)
    'thermal-n4-r007'
    """
    return f"{kind.value}-n{n}-r{replicate:03d}"


def expand_bundle_labels(config: ExperimentConfig) -> list[BundleKey]:
    """
    Expand the configuration into one labelled bundle per (sector, replicate, kind).

    :param config: Experiment configuration
    :type config: ExperimentConfig
    :returns: ``(label, kind, n, replicate)`` tuples in a fixed order
    :rtype: list[tuple[str, ModelKind, int, int]]

    Examples
    --------
    >>> config = ExperimentConfig(photon_sectors=[4], circuits_per_class=3,
    ...                           model_kinds=["smsv", "thermal"])
    >>> len(expand_bundle_labels(config))
    6
    """
    keys = []
    for n in config.photon_sectors:
        for replicate in range(config.circuits_per_class):
            for kind in config.model_kinds:
                keys.append((bundle_label(kind, n, replicate), kind, n, replicate))
    return keys


def _path(config: ExperimentConfig, directory: str, name: str) -> str:
    return os.path.join(config.output_dir, directory, name)


def bundle_path(config: ExperimentConfig, label: str) -> str:
    return _path(config, V_BUNDLES_DIR, label + V_BUNDLE_SUFFIX)


def samples_path(config: ExperimentConfig, label: str) -> str:
    return _path(config, V_SAMPLES_DIR, label + V_SAMPLES_SUFFIX)


def estimate_path(config: ExperimentConfig, label: str) -> str:
    return _path(config, V_ESTIMATES_DIR, label + V_ESTIMATE_SUFFIX)


def kernel_report_path(config: ExperimentConfig) -> str:
    return _path(config, V_KERNELS_DIR, V_KERNEL_REPORT_FILE)


def model_path(config: ExperimentConfig) -> str:
    return _path(config, V_CLASSIFY_DIR, V_MODEL_FILE)


def accuracy_path(config: ExperimentConfig) -> str:
    return _path(config, V_CLASSIFY_DIR, V_ACCURACY_FILE)


def report_path(config: ExperimentConfig, series: str) -> str:
    return _path(config, V_REPORTS_DIR, series + V_REPORT_SUFFIX)


def _require(path: str, stage: str, producer: str) -> str:
    if not os.path.exists(path):
        raise StageDependencyError(f"{stage} needs {path}; run the '{producer}' stage first", missing=path)
    return path


def _map(config: ExperimentConfig, func: Callable, items: list) -> list:
    if config.workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def compile_circuit(config: ExperimentConfig, n: int, replicate: int) -> dict[str, Any]:
    """
    Draw the circuit and squeezing shared by every model kind of one (sector, replicate).

    :returns: ``unitary``, ``squeezing``, ``phases``, ``graph_scale`` and ``circuit_seed``
    :rtype: dict
    :raises EncodingInfeasibleError: If a graph cannot reach the mean photon target
    """
    m = config.modes_for(n)
    target = config.target_mean_photons(n)
    circuit_seed = stage_seed(config, STAGE_GENERATE, n, replicate)
    settings = config.squeezing
    graph_scale = None

    if settings.mode == "graph":
        adjacency = random_graph(m, settings.edge_probability, seed=derive_seed(circuit_seed, 1))
        encoding = encode_graph(adjacency, target)
        unitary, squeezing, graph_scale = encoding.unitary, encoding.squeezing, encoding.scale
    else:
        unitary = haar_unitary(m, seed=derive_seed(circuit_seed, 0))
        if settings.mode == "explicit":
            squeezing = np.asarray(settings.values, dtype=float)
        else:
            squeezing = uniform_squeezing(m, target)

    return {
        "unitary": unitary,
        "squeezing": squeezing,
        "phases": coherent_phases(m, seed=derive_seed(circuit_seed, 2)),
        "graph_scale": graph_scale,
        "circuit_seed": circuit_seed,
        "target": target,
    }


def compile_bundles(config: ExperimentConfig, n: int, replicate: int) -> dict[ModelKind, CircuitBundle]:
    """Circuit bundles of every configured model kind for one (sector, replicate)."""
    circuit = compile_circuit(config, n, replicate)
    models = matched_models(circuit["unitary"], circuit["squeezing"], circuit["phases"])
    unitary = circuit["unitary"]
    digest = config.digest()
    lineage = seed_lineage(config, STAGE_GENERATE, n, replicate)

    bundles = {}
    for kind in config.model_kinds:
        model = models[kind]
        amplitudes = model.amplitudes
        bundles[kind] = CircuitBundle(
            label=bundle_label(kind, n, replicate),
            kind=kind,
            n=n,
            m=model.m,
            replicate=replicate,
            unitary_real=unitary.real.tolist(),
            unitary_imag=unitary.imag.tolist(),
            squeezing=model.squeezing.tolist() if model.squeezing is not None else None,
            mean_photons=model.mean_photons.tolist() if model.mean_photons is not None else None,
            amplitudes_real=amplitudes.real.tolist() if amplitudes is not None else None,
            amplitudes_imag=amplitudes.imag.tolist() if amplitudes is not None else None,
            phases=circuit["phases"].tolist() if kind is ModelKind.COHERENT else None,
            graph_scale=circuit["graph_scale"],
            target_mean_photons=circuit["target"],
            circuit_seed=circuit["circuit_seed"],
            config_digest=digest,
            seed_lineage=lineage,
        )
    return bundles


def load_bundle(config: ExperimentConfig, label: str, stage: str) -> CircuitBundle:
    path = _require(bundle_path(config, label), stage, STAGE_GENERATE)
    verify_artifact(path, config)
    return CircuitBundle(**read_yaml(path))


def run_generate(config: ExperimentConfig) -> StageResult:
    """
    Write one circuit bundle per (model kind, sector, replicate).

    All kinds of a (sector, replicate) share the circuit; thermal sources get
    ``<n_i> = sinh^2 s_i`` and coherent sources ``|alpha_i| = sinh s_i``.
    """
    result = StageResult(stage=STAGE_GENERATE)

    for n in config.photon_sectors:
        for replicate in range(config.circuits_per_class):
            labels = [bundle_label(kind, n, replicate) for kind in config.model_kinds]
            if all(is_current(bundle_path(config, label), config) for label in labels):
                result.skipped.extend(labels)
                continue

            for kind, bundle in compile_bundles(config, n, replicate).items():
                path = bundle_path(config, bundle.label)
                if is_current(path, config):
                    result.skipped.append(bundle.label)
                    continue
                write_yaml(path, {**artifact_header(config, STAGE_GENERATE, bundle.seed_lineage), **bundle.model_dump(mode="json")})
                result.written.append(bundle.label)

    log.info("Wrote %d circuit bundles, %d already current", len(result.written), len(result.skipped))
    result.summary["Bundles"] = len(result.written) + len(result.skipped)
    return result


def _needs_samples(config: ExperimentConfig, kind: ModelKind) -> bool:
    return not (kind is ModelKind.SMSV and config.gbs_estimator == "monte_carlo")


def run_sample(config: ExperimentConfig) -> StageResult:
    """
    Write a sample file for every bundle that is estimated from samples.

    Squeezed-vacuum bundles are sampled only with the brute-force estimator;
    otherwise their orbits are estimated by Monte Carlo.
    """
    result = StageResult(stage=STAGE_SAMPLE)
    keys = [key for key in expand_bundle_labels(config) if _needs_samples(config, key[1])]
    not_sampled = [key[0] for key in expand_bundle_labels(config) if not _needs_samples(config, key[1])]

    for label, kind, n, replicate in keys:
        path = samples_path(config, label)
        if is_current(path, config):
            result.skipped.append(label)
            continue

        bundle = load_bundle(config, label, STAGE_SAMPLE)
        model = model_from_bundle(bundle)
        keys_ = (n, replicate, KIND_INDEX[kind])
        seed = stage_seed(config, STAGE_SAMPLE, *keys_)
        samples = sample_model(model, config.sample_count, seed, workers=config.workers, n_max=n)

        header = samples.header(
            label=label,
            config_digest=config.digest(),
            seed_lineage=seed_lineage(config, STAGE_SAMPLE, *keys_),
        )
        write_samples(path, header, samples.samples)
        result.written.append(label)

    log.info(
        "Wrote %d sample files, %d already current",
        len(result.written),
        len(result.skipped),
        details={"not_sampled": len(not_sampled), "samples_per_bundle": config.sample_count},
    )
    result.summary["NotSampled"] = not_sampled
    return result


def _photon_cutoff(n: int) -> int:
    return 3 * n


def _estimate_bundle(config: ExperimentConfig, key: BundleKey) -> tuple[str, bool]:
    label, kind, n, replicate = key
    path = estimate_path(config, label)
    if is_current(path, config):
        return label, False

    bundle = load_bundle(config, label, STAGE_ESTIMATE)
    model = model_from_bundle(bundle)
    orbits = feature_orbits(n, model.m)
    cutoff = _photon_cutoff(n)
    lineage = seed_lineage(config, STAGE_ESTIMATE, n, replicate, KIND_INDEX[kind])

    if _needs_samples(config, kind):
        sample_file = _require(samples_path(config, label), STAGE_ESTIMATE, STAGE_SAMPLE)
        verify_artifact(sample_file, config)
        header, rows = read_samples(sample_file)
        samples = SampleSet.from_header(header, rows)

        estimates = empirical_orbit_probs(samples, orbits)
        odd_frequency = odd_sector_frequency(samples)
        counts = np.bincount(np.minimum(samples.totals(), cutoff), minlength=cutoff + 1)
        photon_number = (counts / samples.sample_count).tolist()
        source = "samples"
    else:
        estimates = [
            mc_orbit_estimate(
                model.circuit,
                model.squeezing,
                orbit,
                config.mc_draws,
                stage_seed(config, STAGE_ESTIMATE, n, replicate, KIND_INDEX[kind], orbit.d),
                max_size=config.max_hafnian_size,
            )
            for orbit in orbits
        ]
        law = total_photon_distribution(model, cutoff)
        odd_frequency = float(law.probabilities[1::2].sum())
        photon_number = law.probabilities.tolist()
        source = "exact"

    feature = feature_vector(estimates, label=kind, replicate=replicate)
    record = {
        **artifact_header(config, STAGE_ESTIMATE, lineage),
        "label": label,
        "kind": kind.value,
        "n": n,
        "m": model.m,
        "replicate": replicate,
        "estimates": [e.model_dump(mode="json") for e in estimates],
        "feature": feature.model_dump(mode="json"),
        "odd_sector_frequency": odd_frequency,
        "photon_number": {"cutoff": cutoff, "probabilities": photon_number, "source": source},
    }
    write_yaml(path, record)
    return label, True


def run_estimate(config: ExperimentConfig) -> StageResult:
    """
    Estimate the feature orbits of every bundle and assemble its feature vector.

    Mock-up classes (and brute-force squeezed vacuum) use sample frequencies;
    squeezed vacuum otherwise uses Monte Carlo over orbit members.
    """
    result = StageResult(stage=STAGE_ESTIMATE)
    keys = expand_bundle_labels(config)
    if not keys or not os.path.isdir(os.path.join(config.output_dir, V_BUNDLES_DIR)):
        missing = os.path.join(config.output_dir, V_BUNDLES_DIR)
        raise StageDependencyError(f"estimate needs bundles in {missing}; run the 'generate' stage first", missing=missing)

    for label, written in _map(config, lambda key: _estimate_bundle(config, key), keys):
        (result.written if written else result.skipped).append(label)
    log.info("Wrote %d estimate records, %d already current", len(result.written), len(result.skipped))
    return result


def load_estimates(config: ExperimentConfig, stage: str) -> list[dict]:
    """Read the estimate record of every bundle, in expansion order."""
    records = []
    for label, _, _, _ in expand_bundle_labels(config):
        path = _require(estimate_path(config, label), stage, STAGE_ESTIMATE)
        verify_artifact(path, config)
        records.append(read_yaml(path))
    return records


def load_features(config: ExperimentConfig, stage: str) -> list[FeatureVector]:
    return [FeatureVector(**record["feature"]) for record in load_estimates(config, stage)]


def _normalized_ensembles(config: ExperimentConfig, features: list[FeatureVector]) -> tuple[dict, dict]:
    ensembles: dict[tuple[int, ModelKind], list[FeatureVector]] = defaultdict(list)
    excluded: dict[str, int] = defaultdict(int)
    for f in features:
        try:
            ensembles[(f.n, f.label)].append(normalize_feature(f, config.normalization))
        except NormalizationError:
            excluded[f"{f.label.value}-n{f.n}"] += 1
    if excluded:
        log.warning("Zero feature vectors left out of the kernel ensembles", details=dict(excluded))
    return ensembles, dict(excluded)


def compute_kernel_report(config: ExperimentConfig, features: list[FeatureVector]) -> dict:
    """
    Kernel statistics per (sector, kind), genuine-versus-mock-up separations and
    the convergence of the statistics with the number of graphs.
    """
    ensembles, excluded = _normalized_ensembles(config, features)
    stats: dict[tuple[int, ModelKind], KernelStats] = {}
    convergence = []
    for (n, kind), group in sorted(ensembles.items(), key=lambda item: (item[0][0], KIND_INDEX[item[0][1]])):
        if len(group) < 2:
            continue
        stats[(n, kind)] = kernel_stats(group, kind)
        convergence.extend(s.model_dump(mode="json") for s in kernel_convergence(group))

    separations: list[KernelSeparation] = []
    for n in config.photon_sectors:
        genuine = stats.get((n, ModelKind.SMSV))
        if genuine is None:
            continue
        for kind in config.model_kinds:
            if kind is ModelKind.SMSV or (n, kind) not in stats:
                continue
            separations.append(kernel_separation(genuine, stats[(n, kind)], config.kernel_threshold))

    return {
        "normalization": config.normalization,
        "stats": [s.model_dump(mode="json") for s in stats.values()],
        "separations": [s.model_dump(mode="json") for s in separations],
        "convergence": convergence,
        "excluded": excluded,
    }


def run_kernels(config: ExperimentConfig) -> StageResult:
    """Write the kernel report for the feature vectors of every bundle."""
    result = StageResult(stage=STAGE_KERNELS)
    path = kernel_report_path(config)
    if is_current(path, config):
        result.skipped.append(path)
        return result

    features = load_features(config, STAGE_KERNELS)
    report = compute_kernel_report(config, features)
    write_yaml(path, {**artifact_header(config, STAGE_KERNELS), **report})
    result.written.append(path)
    result.summary["Discriminated"] = [
        f"{s['kind_b']}-n{s['n']}" for s in report["separations"] if s["discriminated"]
    ]
    return result


def _default_protocol_sectors(config: ExperimentConfig) -> tuple[list[int], list[int]] | None:
    settings = config.classifier
    sectors = sorted(config.photon_sectors)
    train_ns = settings.train_sectors if settings.train_sectors is not None else sectors[:-1]
    test_ns = settings.test_sectors if settings.test_sectors is not None else sectors[-1:]
    if not train_ns or not test_ns:
        return None
    return train_ns, test_ns


def run_classify(config: ExperimentConfig) -> StageResult:
    """
    Train the classifier on a stratified split of all feature vectors, report the
    held-out accuracy per sector, then run the cross-sector generalization protocol.
    """
    result = StageResult(stage=STAGE_CLASSIFY)
    paths = [model_path(config), accuracy_path(config)]
    if all(is_current(p, config) for p in paths):
        result.skipped.extend(paths)
        return result

    settings = config.classifier
    features = load_features(config, STAGE_CLASSIFY)

    data = LabeledDataset.from_features(features, settings.test_fraction, seed=stage_seed(config, STAGE_CLASSIFY, 0))
    model = mlp_init(settings.hidden, seed=stage_seed(config, STAGE_CLASSIFY, 1), feature_transform=settings.feature_transform)
    model = mlp_train(
        model,
        data,
        epochs=settings.epochs,
        learning_rate=settings.learning_rate,
        batch_size=settings.batch_size,
        seed=stage_seed(config, STAGE_CLASSIFY, 2),
        momentum=settings.momentum,
    )

    overall = mlp_eval(model, data)
    heldout = []
    for n in data.sectors():
        subset = data.restrict(np.array([g[1] == n for g in data.groups]))
        if np.any(subset.split == TEST):
            evaluation = mlp_eval(model, subset)
            heldout.append({"n": n, "accuracy": evaluation.accuracy, **evaluation.confusion()})

    generalization = []
    sectors = _default_protocol_sectors(config)
    if sectors is None:
        log.info("Generalization protocol skipped: a single photon sector is configured")
    else:
        train_ns, test_ns = sectors
        rows = generalization_protocol(
            features,
            train_ns,
            test_ns,
            settings.repeats,
            hidden=settings.hidden,
            epochs=settings.epochs,
            learning_rate=settings.learning_rate,
            batch_size=settings.batch_size,
            momentum=settings.momentum,
            feature_transform=settings.feature_transform,
            seed=stage_seed(config, STAGE_CLASSIFY, 3),
        )
        generalization = [
            {
                "n": row.n,
                "mean": row.mean,
                "std": row.std,
                "repeats": row.repeats,
                "single_repeat": row.single_repeat,
                "accuracies": row.accuracies,
                "train_sectors": list(train_ns),
            }
            for row in rows
        ]

    lineage = seed_lineage(config, STAGE_CLASSIFY)
    write_yaml(model_path(config), {**artifact_header(config, STAGE_CLASSIFY, lineage), "model": model.to_record()})
    write_yaml(
        accuracy_path(config),
        {
            **artifact_header(config, STAGE_CLASSIFY, lineage),
            "overall": {"accuracy": overall.accuracy, **overall.confusion()},
            "heldout": heldout,
            "generalization": generalization,
        },
    )
    result.written.extend(paths)
    log.info("Held-out accuracy %.4f over %d test rows", overall.accuracy, overall.total)
    result.summary["HeldOutAccuracy"] = overall.accuracy
    return result


def load_model(config: ExperimentConfig) -> MlpModel:
    path = _require(model_path(config), STAGE_REPORT, STAGE_CLASSIFY)
    verify_artifact(path, config)
    return MlpModel.from_record(read_yaml(path)["model"])


def build_report_series(config: ExperimentConfig) -> dict[str, tuple[list[str], list[list[Any]]]]:
    """Assemble every report series as ``name -> (columns, rows)``."""
    records = load_estimates(config, STAGE_REPORT)
    kernel_file = _require(kernel_report_path(config), STAGE_REPORT, STAGE_KERNELS)
    verify_artifact(kernel_file, config)
    kernels = read_yaml(kernel_file)
    accuracy_file = _require(accuracy_path(config), STAGE_REPORT, STAGE_CLASSIFY)
    verify_artifact(accuracy_file, config)
    accuracy = read_yaml(accuracy_file)

    series: dict[str, tuple[list[str], list[list[Any]]]] = {}

    clouds, photons, parity = [], [], []
    for record in records:
        feature = FeatureVector(**record["feature"])
        head = [record["kind"], record["n"], record["m"], record["replicate"]]
        clouds.append(head + [float(v) for v in feature.values] + [float(e) for e in feature.std_errors])
        source = record["photon_number"]["source"]
        for k, p in enumerate(record["photon_number"]["probabilities"]):
            photons.append([record["kind"], record["n"], record["replicate"], k, float(p), source])
        parity.append([record["kind"], record["n"], record["replicate"], float(record["odd_sector_frequency"]), source])

    series["orbit_clouds"] = (
        ["kind", "n", "m", "replicate", "p_ones", "p_one_double", "p_two_doubles", "err_ones", "err_one_double", "err_two_doubles"],
        clouds,
    )
    series["photon_number"] = (["kind", "n", "replicate", "photons", "probability", "source"], photons)
    series["parity"] = (["kind", "n", "replicate", "odd_frequency", "source"], parity)

    accuracy_rows = [["heldout", row["n"], float(row["accuracy"]), 0.0, 1] for row in accuracy.get("heldout", [])]
    accuracy_rows.extend(
        ["generalization", row["n"], float(row["mean"]), float(row["std"]), row["repeats"]]
        for row in accuracy.get("generalization", [])
    )
    series["accuracy_vs_n"] = (["protocol", "n", "mean", "std", "repeats"], accuracy_rows)

    series["kernel_stats"] = (
        ["n", "kind", "graphs", "pair_count", "mean", "std"],
        [[s["n"], s["kind"], s["graphs"], s["pair_count"], float(s["mean"]), float(s["std"])] for s in kernels.get("stats", [])],
    )
    series["kernel_separation"] = (
        ["n", "kind_a", "kind_b", "mean_a", "mean_b", "std_a", "std_b", "separation", "variance_ratio", "threshold", "discriminated"],
        [
            [
                s["n"],
                s["kind_a"],
                s["kind_b"],
                float(s["mean_a"]),
                float(s["mean_b"]),
                float(s["std_a"]),
                float(s["std_b"]),
                float(s["separation"]),
                None if s["variance_ratio"] is None else float(s["variance_ratio"]),
                float(s["threshold"]),
                str(bool(s["discriminated"])).lower(),
            ]
            for s in kernels.get("separations", [])
        ],
    )
    series["kernel_convergence"] = (
        ["n", "kind", "graphs", "mean", "std"],
        [[s["n"], s["kind"], s["graphs"], float(s["mean"]), float(s["std"])] for s in kernels.get("convergence", [])],
    )

    features = [FeatureVector(**record["feature"]) for record in records]
    ensembles, _ = _normalized_ensembles(config, features)
    histogram_rows = []
    for (n, kind), group in sorted(ensembles.items(), key=lambda item: (item[0][0], KIND_INDEX[item[0][1]])):
        if len(group) < 2:
            continue
        counts, edges = np.histogram(kernel_values(group), bins=config.histogram_bins, range=(0.0, 1.0))
        for b, count in enumerate(counts):
            histogram_rows.append([n, kind.value, float(edges[b]), float(edges[b + 1]), int(count)])
    series["kernel_histograms"] = (["n", "kind", "bin_low", "bin_high", "count"], histogram_rows)

    return {name: series[name] for name in REPORT_SERIES}


def run_report(config: ExperimentConfig) -> StageResult:
    """Write the plain-text report series under ``reports/``."""
    result = StageResult(stage=STAGE_REPORT)
    series = build_report_series(config)
    preamble = {"config_digest": config.digest(), "stage": STAGE_REPORT}

    for name, (columns, rows) in series.items():
        path = report_path(config, name)
        if is_current(path, config):
            result.skipped.append(path)
            continue
        write_tsv(path, columns, rows, preamble=preamble)
        result.written.append(path)

    result.summary["Series"] = sorted(series)
    return result


STAGE_RUNNERS: dict[str, Callable[[ExperimentConfig], StageResult]] = {
    STAGE_GENERATE: run_generate,
    STAGE_SAMPLE: run_sample,
    STAGE_ESTIMATE: run_estimate,
    STAGE_KERNELS: run_kernels,
    STAGE_CLASSIFY: run_classify,
    STAGE_REPORT: run_report,
}
