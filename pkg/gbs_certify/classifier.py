"""
Binary classifier separating genuine squeezed-vacuum feature vectors from mock-ups.

The network is ``Linear(3, h1) -> ReLU -> Linear(h1, h2) -> ReLU ->
BatchNorm(h2) -> Linear(h2, 1) -> sigmoid``, trained with binary cross-entropy
and momentum SGD.  Inputs are the raw orbit-probability triples, optionally log
transformed, then standardized with statistics fitted on the training split and
kept in the model.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.special
import structlog

from .constants import (
    BATCHNORM_EPS,
    BATCHNORM_MOMENTUM,
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_HIDDEN,
    DEFAULT_LEARNING_RATE,
    DEFAULT_MOMENTUM,
    DEFAULT_TEST_FRACTION,
    LOG_FEATURE_FLOOR,
    MLP_FORMAT_VERSION,
)
from .errors import DegenerateDatasetError, ParameterError, ProtocolError
from .linalg import as_generator, derive_seed
from .models import FeatureVector

log = structlog.get_logger(__name__)

PARAMETER_NAMES = ("W1", "b1", "W2", "b2", "gamma", "beta", "W3", "b3")

TRAIN = "train"
TEST = "test"


@dataclass
class MlpModel:
    """Weights, batch-norm statistics, input standardization and training metadata."""

    hidden: tuple[int, int]
    params: dict[str, np.ndarray]
    running_mean: np.ndarray
    running_var: np.ndarray
    input_mean: np.ndarray = field(default_factory=lambda: np.zeros(3))
    input_scale: np.ndarray = field(default_factory=lambda: np.ones(3))
    feature_transform: str = "log"
    metadata: dict = field(default_factory=dict)

    def copy(self) -> "MlpModel":
        return MlpModel(
            hidden=tuple(self.hidden),
            params={k: v.copy() for k, v in self.params.items()},
            running_mean=self.running_mean.copy(),
            running_var=self.running_var.copy(),
            input_mean=self.input_mean.copy(),
            input_scale=self.input_scale.copy(),
            feature_transform=self.feature_transform,
            metadata=dict(self.metadata),
        )

    def parameter_count(self) -> int:
        """Trainable parameters (batch-norm scale and shift included)."""
        return int(sum(v.size for v in self.params.values()))

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(v))) for v in self.params.values())

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Inference-mode probabilities of the genuine class for raw features."""
        return mlp_forward(self, x, training=False)

    def to_record(self) -> dict:
        return {
            "format_version": MLP_FORMAT_VERSION,
            "dimensions": {"input": 3, "hidden": list(self.hidden), "output": 1},
            "parameters": {k: self.params[k].tolist() for k in PARAMETER_NAMES},
            "batchnorm": {
                "running_mean": self.running_mean.tolist(),
                "running_var": self.running_var.tolist(),
                "momentum": BATCHNORM_MOMENTUM,
                "eps": BATCHNORM_EPS,
            },
            "inputs": {
                "transform": self.feature_transform,
                "mean": self.input_mean.tolist(),
                "scale": self.input_scale.tolist(),
            },
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_record(cls, record: dict) -> "MlpModel":
        version = record.get("format_version")
        if version != MLP_FORMAT_VERSION:
            raise ParameterError(f"unsupported model format version {version}")
        return cls(
            hidden=tuple(record["dimensions"]["hidden"]),
            params={k: np.asarray(record["parameters"][k], dtype=float) for k in PARAMETER_NAMES},
            running_mean=np.asarray(record["batchnorm"]["running_mean"], dtype=float),
            running_var=np.asarray(record["batchnorm"]["running_var"], dtype=float),
            input_mean=np.asarray(record["inputs"]["mean"], dtype=float),
            input_scale=np.asarray(record["inputs"]["scale"], dtype=float),
            feature_transform=record["inputs"]["transform"],
            metadata=dict(record.get("metadata", {})),
        )


@dataclass
class EvalResult:
    accuracy: float
    true_positive: int
    true_negative: int
    false_positive: int
    false_negative: int

    @property
    def total(self) -> int:
        return self.true_positive + self.true_negative + self.false_positive + self.false_negative

    def confusion(self) -> dict:
        return {
            "true_positive": self.true_positive,
            "true_negative": self.true_negative,
            "false_positive": self.false_positive,
            "false_negative": self.false_negative,
        }


@dataclass
class LabeledDataset:
    """
    Feature triples with binary labels (1 genuine, 0 mock-up) and a split tag per row.

    ``groups`` holds the ``(kind, n)`` of each row, used for stratification and
    per-sector reporting.
    """

    x: np.ndarray
    y: np.ndarray
    split: np.ndarray
    groups: list[tuple[str, int]] = field(default_factory=list)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1, 3)
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        self.split = np.asarray(self.split, dtype=object).reshape(-1)
        if not (len(self.x) == len(self.y) == len(self.split)):
            raise ParameterError("dataset arrays have different lengths")
        if not np.all(np.isin(self.y, (0.0, 1.0))):
            raise ParameterError("labels must be 0 or 1")
        if self.groups and len(self.groups) != len(self.x):
            raise ParameterError("groups must have one entry per row")

    def __len__(self) -> int:
        return len(self.y)

    def part(self, split: str) -> tuple[np.ndarray, np.ndarray]:
        mask = self.split == split
        return self.x[mask], self.y[mask]

    def sectors(self) -> list[int]:
        return sorted({n for _, n in self.groups})

    def restrict(self, mask: np.ndarray) -> "LabeledDataset":
        mask = np.asarray(mask, dtype=bool)
        return LabeledDataset(
            x=self.x[mask],
            y=self.y[mask],
            split=self.split[mask],
            groups=[g for g, keep in zip(self.groups, mask) if keep],
        )

    @classmethod
    def from_features(
        cls,
        features: Sequence[FeatureVector],
        test_fraction: float = DEFAULT_TEST_FRACTION,
        seed: int = 0,
        split: str | None = None,
    ) -> "LabeledDataset":
        """
        Build a dataset from labelled feature vectors.

        With ``split`` given every row gets that tag; otherwise rows are split
        with :func:`stratified_split`.
        """
        if any(f.label is None for f in features):
            raise ParameterError("every feature vector needs a label")
        x = np.array([f.values for f in features], dtype=float).reshape(-1, 3)
        y = np.array([1.0 if f.label.is_genuine else 0.0 for f in features])
        groups = [(f.label.value, f.n) for f in features]
        if split is None:
            tags = stratified_split(groups, test_fraction, seed)
        else:
            tags = np.array([split] * len(features), dtype=object)
        return cls(x=x, y=y, split=tags, groups=groups)


def stratified_split(groups: Sequence[tuple[str, int]], test_fraction: float, seed: int) -> np.ndarray:
    """
    Seeded train/test tags, split separately inside every ``(kind, n)`` group.

    Each group with at least two rows puts at least one row in each split.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ParameterError(f"test fraction must lie in (0, 1), got {test_fraction}")

    rng = as_generator(seed)
    tags = np.array([TRAIN] * len(groups), dtype=object)
    for group in sorted(set(groups)):
        members = np.array([i for i, g in enumerate(groups) if g == group])
        n_test = int(round(len(members) * test_fraction))
        if len(members) >= 2:
            n_test = min(max(n_test, 1), len(members) - 1)
        chosen = rng.permutation(members)[:n_test]
        tags[chosen] = TEST
    return tags


def transform_inputs(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Apply the model's feature transform and standardization to raw triples."""
    z = np.asarray(x, dtype=float).reshape(-1, 3)
    if model.feature_transform == "log":
        z = np.log(np.maximum(z, LOG_FEATURE_FLOOR))
    return (z - model.input_mean) / model.input_scale


def mlp_init(
    hidden: Sequence[int] = DEFAULT_HIDDEN,
    seed: int | None = None,
    feature_transform: str = "log",
) -> MlpModel:
    """
    Initialize the network with ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))`` weights and biases.

    :param hidden: Two hidden widths
    :type hidden: Sequence[int]
    :param seed: Initialization seed
    :type seed: int | None
    :param feature_transform: ``"log"`` or ``"raw"``
    :type feature_transform: str
    :returns: Untrained model
    :rtype: MlpModel
    :raises ParameterError: On a zero or missing width

    Examples
    --------
    >>> mlp_init((32, 16), seed=0).parameter_count()
    705
    """
    hidden = tuple(int(w) for w in hidden)
    if len(hidden) != 2 or any(w < 1 for w in hidden):
        raise ParameterError(f"hidden must be two positive widths, got {hidden}")
    if feature_transform not in ("log", "raw"):
        raise ParameterError(f"unknown feature transform '{feature_transform}'")

    rng = as_generator(seed)
    h1, h2 = hidden

    def _uniform(fan_in: int, shape: tuple[int, ...]) -> np.ndarray:
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    params = {
        "W1": _uniform(3, (3, h1)),
        "b1": _uniform(3, (h1,)),
        "W2": _uniform(h1, (h1, h2)),
        "b2": _uniform(h1, (h2,)),
        "gamma": np.ones(h2),
        "beta": np.zeros(h2),
        "W3": _uniform(h2, (h2, 1)),
        "b3": _uniform(h2, (1,)),
    }
    return MlpModel(
        hidden=hidden,
        params=params,
        running_mean=np.zeros(h2),
        running_var=np.ones(h2),
        feature_transform=feature_transform,
        metadata={"init_seed": seed},
    )


def _forward(model: MlpModel, z: np.ndarray, batch_stats: bool) -> tuple[np.ndarray, dict]:
    p = model.params
    h1 = z @ p["W1"] + p["b1"]
    a1 = np.maximum(h1, 0.0)
    h2 = a1 @ p["W2"] + p["b2"]
    a2 = np.maximum(h2, 0.0)

    if batch_stats:
        mu = a2.mean(axis=0)
        var = a2.var(axis=0)
    else:
        mu = model.running_mean
        var = model.running_var
    inv_std = 1.0 / np.sqrt(var + BATCHNORM_EPS)
    xhat = (a2 - mu) * inv_std
    bn = p["gamma"] * xhat + p["beta"]
    logits = (bn @ p["W3"] + p["b3"]).reshape(-1)

    cache = {"z": z, "h1": h1, "a1": a1, "h2": h2, "a2": a2, "mu": mu, "var": var, "inv_std": inv_std, "xhat": xhat, "bn": bn}
    return logits, cache


def bce_with_logits(logits: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy computed from logits."""
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


def mlp_forward(model: MlpModel, x: np.ndarray, training: bool = False) -> np.ndarray:
    """
    Probabilities of the genuine class.

    ``training=True`` normalizes with the batch statistics; otherwise the
    running statistics are used.
    """
    logits, _ = _forward(model, transform_inputs(model, x), batch_stats=training)
    return scipy.special.expit(logits)


def mlp_gradients(model: MlpModel, x: np.ndarray, y: np.ndarray, training: bool = True) -> tuple[float, dict[str, np.ndarray]]:
    """
    Loss and analytic gradients with respect to every parameter.

    With ``training=False`` the batch-norm statistics are frozen at their
    running values and the layer is an affine map.

    :returns: Mean loss and gradients keyed like ``model.params``
    :rtype: tuple[float, dict[str, np.ndarray]]
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    logits, c = _forward(model, transform_inputs(model, x), batch_stats=training)
    p = model.params
    n = len(y)

    dlogits = (scipy.special.expit(logits) - y) / n
    grads = {
        "W3": c["bn"].T @ dlogits[:, None],
        "b3": np.array([dlogits.sum()]),
    }

    dbn = dlogits[:, None] @ p["W3"].T
    grads["gamma"] = (dbn * c["xhat"]).sum(axis=0)
    grads["beta"] = dbn.sum(axis=0)

    dxhat = dbn * p["gamma"]
    if training:
        da2 = c["inv_std"] / n * (n * dxhat - dxhat.sum(axis=0) - c["xhat"] * (dxhat * c["xhat"]).sum(axis=0))
    else:
        da2 = dxhat * c["inv_std"]

    dh2 = da2 * (c["h2"] > 0)
    grads["W2"] = c["a1"].T @ dh2
    grads["b2"] = dh2.sum(axis=0)

    dh1 = (dh2 @ p["W2"].T) * (c["h1"] > 0)
    grads["W1"] = c["z"].T @ dh1
    grads["b1"] = dh1.sum(axis=0)

    return bce_with_logits(logits, y), grads


def _fit_inputs(model: MlpModel, x: np.ndarray) -> None:
    z = np.asarray(x, dtype=float).reshape(-1, 3)
    if model.feature_transform == "log":
        z = np.log(np.maximum(z, LOG_FEATURE_FLOOR))
    scale = z.std(axis=0)
    model.input_mean = z.mean(axis=0)
    model.input_scale = np.where(scale > 0.0, scale, 1.0)


def mlp_train(
    model: MlpModel,
    data: LabeledDataset,
    epochs: int = DEFAULT_EPOCHS,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    batch_size: int = DEFAULT_BATCH_SIZE,
    seed: int | None = None,
    momentum: float = DEFAULT_MOMENTUM,
) -> MlpModel:
    """
    Train on the ``train`` split and return a new model.

    Batches are drawn from a seeded permutation each epoch; batches with fewer
    than two rows are skipped because batch normalization needs a spread.

    :param model: Starting model (left unchanged)
    :type model: MlpModel
    :param data: Dataset with a ``train`` split holding both classes
    :type data: LabeledDataset
    :param epochs: Passes over the training split
    :type epochs: int
    :param learning_rate: SGD step size
    :type learning_rate: float
    :param batch_size: Rows per batch
    :type batch_size: int
    :param seed: Batch-order seed
    :type seed: int | None
    :param momentum: SGD momentum
    :type momentum: float
    :returns: The trained copy
    :rtype: MlpModel
    :raises DegenerateDatasetError: If the training split is empty or has one class
    """
    x, y = data.part(TRAIN)
    if len(y) == 0:
        raise DegenerateDatasetError("training split is empty")
    if len(np.unique(y)) < 2:
        raise DegenerateDatasetError("training split holds a single class")

    trained = model.copy()
    if epochs == 0:
        return trained

    _fit_inputs(trained, x)
    rng = as_generator(seed)
    velocity = {k: np.zeros_like(v) for k, v in trained.params.items()}
    history = []

    for epoch in range(epochs):
        order = rng.permutation(len(y))
        losses = []
        for start in range(0, len(order), batch_size):
            batch = order[start : start + batch_size]
            if len(batch) < 2:
                continue
            loss, grads = mlp_gradients(trained, x[batch], y[batch], training=True)
            losses.append(loss)

            a2 = np.maximum(transform_inputs(trained, x[batch]) @ trained.params["W1"] + trained.params["b1"], 0.0)
            a2 = np.maximum(a2 @ trained.params["W2"] + trained.params["b2"], 0.0)
            trained.running_mean = (1.0 - BATCHNORM_MOMENTUM) * trained.running_mean + BATCHNORM_MOMENTUM * a2.mean(axis=0)
            trained.running_var = (1.0 - BATCHNORM_MOMENTUM) * trained.running_var + BATCHNORM_MOMENTUM * a2.var(axis=0, ddof=1)

            for name, grad in grads.items():
                velocity[name] = momentum * velocity[name] + grad
                trained.params[name] = trained.params[name] - learning_rate * velocity[name]

        epoch_loss = float(np.mean(losses)) if losses else float("nan")
        history.append(epoch_loss)
        log.debug("Epoch %d loss %.6f", epoch + 1, epoch_loss)

    if not trained.is_finite():
        raise DegenerateDatasetError("training diverged to non-finite parameters")

    trained.metadata.update(
        {
            "epochs": epochs,
            "learning_rate": learning_rate,
            "momentum": momentum,
            "batch_size": batch_size,
            "train_seed": seed,
            "train_rows": int(len(y)),
            "loss_history": history,
        }
    )
    return trained


def mlp_eval(model: MlpModel, data: LabeledDataset, split: str | None = TEST) -> EvalResult:
    """
    Accuracy and confusion counts at threshold 0.5.

    :param split: Split to evaluate, or ``None`` for every row
    :type split: str | None
    :raises DegenerateDatasetError: If the selection is empty
    """
    if split is None:
        x, y = data.x, data.y
    else:
        x, y = data.part(split)
    if len(y) == 0:
        raise DegenerateDatasetError(f"no rows to evaluate in split '{split}'")

    predicted = model.predict_proba(x) >= 0.5
    actual = y >= 0.5
    tp = int(np.count_nonzero(predicted & actual))
    tn = int(np.count_nonzero(~predicted & ~actual))
    fp = int(np.count_nonzero(predicted & ~actual))
    fn = int(np.count_nonzero(~predicted & actual))
    return EvalResult(
        accuracy=(tp + tn) / len(y),
        true_positive=tp,
        true_negative=tn,
        false_positive=fp,
        false_negative=fn,
    )


@dataclass
class SectorAccuracy:
    n: int
    mean: float
    std: float
    repeats: int
    single_repeat: bool
    accuracies: list[float]


def generalization_protocol(
    features: Sequence[FeatureVector],
    train_ns: Sequence[int],
    test_ns: Sequence[int],
    repeats: int,
    hidden: Sequence[int] = DEFAULT_HIDDEN,
    epochs: int = DEFAULT_EPOCHS,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    batch_size: int = DEFAULT_BATCH_SIZE,
    momentum: float = DEFAULT_MOMENTUM,
    feature_transform: str = "log",
    seed: int = 0,
) -> list[SectorAccuracy]:
    """
    Train on some photon sectors and test on others, repeated with fresh seeds.

    Every repeat re-seeds both the initialization and the batch order.

    :param features: Labelled feature vectors of all sectors
    :type features: Sequence[FeatureVector]
    :param train_ns: Training sectors
    :type train_ns: Sequence[int]
    :param test_ns: Test sectors, disjoint from ``train_ns``
    :type test_ns: Sequence[int]
    :param repeats: Independent trainings
    :type repeats: int
    :returns: Mean and standard deviation of the accuracy per test sector
    :rtype: list[SectorAccuracy]
    :raises ProtocolError: If the sector sets overlap, are empty or ``repeats < 1``
    """
    train_ns = sorted(set(train_ns))
    test_ns = sorted(set(test_ns))
    overlap = set(train_ns) & set(test_ns)
    if overlap:
        raise ProtocolError(f"train and test sectors overlap: {sorted(overlap)}")
    if not train_ns or not test_ns:
        raise ProtocolError("train and test sectors must both be non-empty")
    if repeats < 1:
        raise ProtocolError(f"repeats must be at least 1, got {repeats}")

    train = LabeledDataset.from_features([f for f in features if f.n in train_ns], split=TRAIN)
    tests = {n: LabeledDataset.from_features([f for f in features if f.n == n], split=TEST) for n in test_ns}
    for n, data in tests.items():
        if len(data) == 0:
            raise ProtocolError(f"no feature vectors in test sector n={n}")

    accuracies: dict[int, list[float]] = {n: [] for n in test_ns}
    for r in range(repeats):
        model = mlp_init(hidden, seed=derive_seed(seed, r, 0), feature_transform=feature_transform)
        model = mlp_train(model, train, epochs, learning_rate, batch_size, seed=derive_seed(seed, r, 1), momentum=momentum)
        for n in test_ns:
            accuracies[n].append(mlp_eval(model, tests[n]).accuracy)

    results = []
    for n in test_ns:
        values = np.asarray(accuracies[n])
        results.append(
            SectorAccuracy(
                n=n,
                mean=float(values.mean()),
                std=float(values.std(ddof=1)) if repeats > 1 else 0.0,
                repeats=repeats,
                single_repeat=repeats == 1,
                accuracies=[float(a) for a in values],
            )
        )
        log.info("Generalization accuracy", details={"n": n, "mean": results[-1].mean, "std": results[-1].std})
    return results


def relu_margin(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Smallest absolute hidden pre-activation per row (distance to a ReLU kink)."""
    _, c = _forward(model, transform_inputs(model, x), batch_stats=False)
    return np.minimum(np.abs(c["h1"]).min(axis=1), np.abs(c["h2"]).min(axis=1))


def finite_diff_gradcheck(
    model: MlpModel,
    x: np.ndarray,
    y: np.ndarray,
    step: float = 1e-5,
    training: bool = False,
    floor: float = 1e-6,
) -> float:
    """
    Largest relative error between analytic and central-difference gradients.

    The relative error of one entry is ``|a - d| / max(|a| + |d|, floor)``.
    Batch normalization uses the running statistics unless ``training=True``.
    """
    _, analytic = mlp_gradients(model, x, y, training=training)
    y = np.asarray(y, dtype=float).reshape(-1)
    z = transform_inputs(model, x)
    probe = model.copy()

    def _loss() -> float:
        logits, _ = _forward(probe, z, batch_stats=training)
        return bce_with_logits(logits, y)

    worst = 0.0
    for name in PARAMETER_NAMES:
        values = probe.params[name]
        flat = values.reshape(-1)
        grad = analytic[name].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = _loss()
            flat[i] = original - step
            minus = _loss()
            flat[i] = original
            numeric = (plus - minus) / (2.0 * step)
            error = abs(grad[i] - numeric) / max(abs(grad[i]) + abs(numeric), floor)
            worst = max(worst, error)
    return float(worst)
