import pytest
import numpy as np

from gbs_certify.classifier import (
    TEST,
    TRAIN,
    LabeledDataset,
    MlpModel,
    finite_diff_gradcheck,
    generalization_protocol,
    mlp_eval,
    mlp_forward,
    mlp_init,
    mlp_train,
    relu_margin,
    stratified_split,
)
from gbs_certify.errors import DegenerateDatasetError, ParameterError, ProtocolError
from gbs_certify.models import FeatureVector, ModelKind

MOCKUPS = [ModelKind.THERMAL, ModelKind.COHERENT, ModelKind.DISTINGUISHABLE_SMSV, ModelKind.DISTINGUISHABLE_THERMAL]


def _features(sectors=(4, 6), per_kind: int = 20, seed: int = 0) -> list[FeatureVector]:
    """Genuine triples lean on the first orbit, mock-ups on the doubled ones."""
    rng = np.random.default_rng(seed)
    features = []
    for n in sectors:
        for kind in [ModelKind.SMSV] + MOCKUPS:
            centre = np.array([0.6, 0.2, 0.05]) if kind is ModelKind.SMSV else np.array([0.15, 0.45, 0.3])
            for r in range(per_kind if kind is ModelKind.SMSV else per_kind // 4):
                values = np.abs(centre * np.exp(0.1 * rng.standard_normal(3)))
                features.append(FeatureVector(n=n, m=n * n, values=tuple(values), label=kind, replicate=r))
    return features


@pytest.fixture(scope="module")
def dataset() -> LabeledDataset:
    return LabeledDataset.from_features(_features(), test_fraction=0.25, seed=1)


@pytest.fixture(scope="module")
def trained(dataset) -> MlpModel:
    model = mlp_init((32, 16), seed=2)
    return mlp_train(model, dataset, epochs=30, learning_rate=0.05, batch_size=16, seed=3, momentum=0.9)


def test_mlp_init_shapes():
    model = mlp_init((32, 16), seed=0)
    assert model.parameter_count() == 705
    assert model.params["W1"].shape == (3, 32)
    assert model.params["W3"].shape == (16, 1)
    assert np.all(np.abs(model.params["W1"]) <= 1.0 / np.sqrt(3))
    assert np.all(np.abs(model.params["W2"]) <= 1.0 / np.sqrt(32))
    assert np.array_equal(model.params["gamma"], np.ones(16))


def test_mlp_init_is_reproducible():
    a = mlp_init((8, 4), seed=5)
    b = mlp_init((8, 4), seed=5)
    for name in a.params:
        assert np.array_equal(a.params[name], b.params[name]), name


@pytest.mark.parametrize("hidden", [(0, 4), (8,), (4, 4, 4)])
def test_mlp_init_rejects_bad_widths(hidden):
    with pytest.raises(ParameterError):
        mlp_init(hidden)


def test_forward_outputs_probabilities(dataset):
    p = mlp_forward(mlp_init((8, 4), seed=1), dataset.x)
    assert p.shape == (len(dataset),)
    assert np.all((p > 0) & (p < 1))


@pytest.mark.parametrize("training", [False, True])
def test_gradients_match_finite_differences(dataset, training):
    model = mlp_init((6, 5), seed=4)
    x, y = dataset.x[::7][:12], dataset.y[::7][:12]
    assert relu_margin(model, x).min() > 1e-4, "batch sits on a ReLU kink"
    assert finite_diff_gradcheck(model, x, y, training=training) < 1e-4


def test_training_separates_classes(dataset, trained):
    result = mlp_eval(trained, dataset)
    assert result.accuracy >= 0.9, f"held-out accuracy {result.accuracy}"
    assert result.total == int(np.count_nonzero(dataset.split == TEST))
    history = trained.metadata["loss_history"]
    assert len(history) == 30
    assert history[-1] < history[0]


def test_shuffled_labels_give_chance_accuracy():
    data = LabeledDataset.from_features(_features(per_kind=400, seed=5), test_fraction=0.25, seed=6)
    data.y = np.random.default_rng(7).permutation(data.y)
    model = mlp_train(mlp_init((32, 16), seed=8), data, epochs=10, learning_rate=0.05, batch_size=32, seed=9)
    accuracy = mlp_eval(model, data).accuracy
    assert 0.4 <= accuracy <= 0.6, f"accuracy {accuracy} on shuffled labels"


def test_training_is_reproducible(dataset, trained):
    again = mlp_train(mlp_init((32, 16), seed=2), dataset, epochs=30, learning_rate=0.05, batch_size=16, seed=3)
    assert np.array_equal(again.predict_proba(dataset.x), trained.predict_proba(dataset.x))


def test_zero_epochs_returns_unchanged_copy(dataset):
    model = mlp_init((8, 4), seed=1)
    copy = mlp_train(model, dataset, epochs=0)
    assert copy is not model
    assert np.array_equal(copy.params["W1"], model.params["W1"])


def test_training_needs_two_classes():
    genuine = [f for f in _features() if f.label is ModelKind.SMSV]
    data = LabeledDataset.from_features(genuine, split=TRAIN)
    with pytest.raises(DegenerateDatasetError):
        mlp_train(mlp_init((8, 4), seed=1), data, epochs=1)


def test_model_record_round_trip(dataset, trained):
    rebuilt = MlpModel.from_record(trained.to_record())
    assert np.allclose(rebuilt.predict_proba(dataset.x), trained.predict_proba(dataset.x))
    assert rebuilt.hidden == (32, 16)


def test_model_record_version_check(trained):
    record = trained.to_record()
    record["format_version"] = 99
    with pytest.raises(ParameterError):
        MlpModel.from_record(record)


def test_stratified_split_keeps_every_group_in_both_parts():
    groups = [("smsv", 4)] * 10 + [("thermal", 4)] * 3 + [("coherent", 6)] * 2
    tags = stratified_split(groups, 0.2, seed=0)
    for group in set(groups):
        parts = {tags[i] for i, g in enumerate(groups) if g == group}
        assert parts == {TRAIN, TEST}, group


def test_stratified_split_rejects_bad_fraction():
    with pytest.raises(ParameterError):
        stratified_split([("smsv", 4)], 1.0, seed=0)


def test_dataset_restrict(dataset):
    sector = dataset.restrict(np.array([g[1] == 6 for g in dataset.groups]))
    assert sector.sectors() == [6]
    assert len(sector) == len(dataset) // 2


def test_generalization_protocol():
    rows = generalization_protocol(
        _features(sectors=(4, 6, 8)),
        train_ns=[4, 6],
        test_ns=[8],
        repeats=2,
        hidden=(16, 8),
        epochs=20,
        learning_rate=0.05,
        batch_size=16,
        seed=7,
    )
    assert [r.n for r in rows] == [8]
    assert rows[0].repeats == 2
    assert len(rows[0].accuracies) == 2
    assert rows[0].mean >= 0.8


def test_generalization_protocol_single_repeat():
    rows = generalization_protocol(_features(), train_ns=[4], test_ns=[6], repeats=1, hidden=(8, 4), epochs=2, seed=1)
    assert rows[0].single_repeat is True
    assert rows[0].std == 0.0


@pytest.mark.parametrize(
    "train_ns,test_ns,repeats",
    [([4], [4, 6], 1), ([], [6], 1), ([4], [6], 0), ([4], [10], 1)],
)
def test_generalization_protocol_errors(train_ns, test_ns, repeats):
    with pytest.raises(ProtocolError):
        generalization_protocol(_features(), train_ns=train_ns, test_ns=test_ns, repeats=repeats, epochs=1)
