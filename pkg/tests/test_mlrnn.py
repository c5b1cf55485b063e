import numpy as np
import pytest

import rnnkit.controllers.mlrnn as mlrnn_controller
from rnnkit.controllers.mlrnn import (
    accuracy,
    audit_model,
    cap_row_sums,
    confusion_matrix,
    encode,
    forward,
    hidden_excitation,
    model_to_network,
    predict,
    slann_forward,
    train,
    train_multichannel,
)
from rnnkit.controllers.numeric import run_fista
from rnnkit.controllers.steady_state import solve_steady_state, validate_network
from rnnkit.exceptions import ArgumentError, TrainingError
from rnnkit.models.mlrnn import LabeledDataset, NormalizationStats, TrainConfig, one_hot
from rnnkit.utils.data_loader import split_rows


def test_layer_sizes_and_shapes(small_model):
    assert small_model.layer_sizes == (8, 20, 40, 2)
    assert small_model.depth == 2
    (W,) = small_model.inhibitory_weights
    assert W.shape == (8, 20)
    assert small_model.W_plus_L.shape == small_model.W_minus_L.shape == (20, 40)
    assert small_model.W_plus_readout.shape == (40, 2)
    assert small_model.class_names == ("class0", "class1")


def test_trained_model_passes_audit(small_model):
    report = audit_model(small_model)
    assert report.passed, str(report)
    assert small_model.alpha > 0
    assert np.all(small_model.output_lambda >= 0)


def test_hidden_cells_are_probabilities(small_model, gaussian_data):
    _, test_set = gaussian_data
    Q = hidden_excitation(small_model, test_set.X)
    assert np.all((Q >= 0) & (Q <= 1))
    h = small_model.half_width
    # paired cells: alpha/(alpha+z) and z/(alpha+z)
    np.testing.assert_allclose(Q[:, :h] + Q[:, h:], 1.0, atol=1e-12)


def test_output_equals_offset_plus_slann(small_model, gaussian_data):
    _, test_set = gaussian_data
    W1_bar, W2_bar = small_model.slann_weights()
    reference = small_model.offset + slann_forward(W1_bar, W2_bar, small_model.alpha, encode(small_model, test_set.X))
    out = forward(small_model, test_set.X)
    assert np.max(np.abs(out - reference)) <= 1e-10
    np.testing.assert_array_equal(predict(small_model, test_set.X), np.argmax(reference, axis=1))


def test_two_gaussians_are_separated(small_model, gaussian_data):
    _, test_set = gaussian_data
    assert accuracy(predict(small_model, test_set.X), test_set.labels) >= 0.95


def test_training_is_deterministic(gaussian_data, small_config):
    train_set, _ = gaussian_data
    first, second = train(train_set, small_config), train(train_set, small_config)
    for a, b in zip(first.matrices(), second.matrices()):
        np.testing.assert_array_equal(a, b)
    assert first.alpha == second.alpha
    np.testing.assert_array_equal(first.output_lambda, second.output_lambda)


def test_different_seed_changes_weights(gaussian_data, small_config):
    train_set, _ = gaussian_data
    other = train(train_set, small_config.model_copy(update={"seed": 4}))
    reference = train(train_set, small_config)
    assert not np.array_equal(other.W_minus_L, reference.W_minus_L)


def test_single_hidden_layer(gaussian_data):
    train_set, test_set = gaussian_data
    model = train(train_set, TrainConfig(hidden_layer_sizes=(40,), seed=1))
    assert model.layer_sizes == (8, 40, 2)
    assert model.inhibitory_weights == ()
    np.testing.assert_array_equal(encode(model, test_set.X), np.minimum(test_set.X, 1.0))
    assert audit_model(model).passed
    assert accuracy(predict(model, test_set.X), test_set.labels) >= 0.9


DEEP_SIZES = (20, 20, 40)


@pytest.fixture(scope="module")
def deep_model(gaussian_data):
    train_set, _ = gaussian_data
    return train(train_set, TrainConfig(hidden_layer_sizes=DEEP_SIZES, seed=3))


def test_deep_model_shapes_and_audit(deep_model):
    assert deep_model.layer_sizes == (8, 20, 20, 40, 2)
    assert deep_model.depth == 3
    assert [W.shape for W in deep_model.inhibitory_weights] == [(8, 20), (20, 20)]
    assert len(deep_model.rates) == 2
    report = audit_model(deep_model)
    assert report.passed, str(report)


def test_deep_model_output_equals_offset_plus_slann(deep_model, gaussian_data):
    _, test_set = gaussian_data
    W1_bar, W2_bar = deep_model.slann_weights()
    reference = deep_model.offset + slann_forward(W1_bar, W2_bar, deep_model.alpha, encode(deep_model, test_set.X))
    assert np.max(np.abs(forward(deep_model, test_set.X) - reference)) <= 1e-10
    np.testing.assert_array_equal(predict(deep_model, test_set.X), np.argmax(reference, axis=1))


def test_deep_model_network_steady_state_matches_forward(deep_model, gaussian_data):
    _, test_set = gaussian_data
    for x in test_set.X[:3]:
        net = model_to_network(deep_model, x)
        assert validate_network(net).passed
        q = solve_steady_state(net).q
        np.testing.assert_allclose(q[-2:], forward(deep_model, x)[0], atol=1e-9)


def test_cap_row_sums_leaves_light_rows_alone():
    W = np.array([[0.2, 0.3], [1.0, 3.0], [0.0, 0.0], [0.5, 0.5]])
    capped = cap_row_sums(W, 1.0)
    np.testing.assert_array_equal(capped[[0, 2, 3]], W[[0, 2, 3]])
    np.testing.assert_allclose(capped[1], [0.25, 0.75])


def test_reconstruction_caps_each_row_separately(gaussian_data, monkeypatch):
    fitted = []

    def recording(problem, cfg):
        result = run_fista(problem, cfg)
        fitted.append(result.W.T.copy())
        return result

    monkeypatch.setattr(mlrnn_controller, "run_fista", recording)
    train_set, _ = gaussian_data
    model = train(train_set, TrainConfig(hidden_layer_sizes=DEEP_SIZES, seed=3))
    assert len(fitted) == 2
    for k, (raw, W) in enumerate(zip(fitted, model.inhibitory_weights)):
        limit = 1.0 if k == 0 else model.rates[k - 1]
        sums = raw.sum(axis=1)
        light = sums <= limit
        np.testing.assert_array_equal(W[light], raw[light])
        np.testing.assert_allclose(W[~light], raw[~light] * (limit / sums[~light])[:, None], rtol=1e-12)
        np.testing.assert_allclose(W[~light].sum(axis=1), limit, rtol=1e-12)
        assert np.all(W.sum(axis=1) <= limit * (1 + 1e-12))


def test_single_channel_matches_train(gaussian_data, small_config, small_model):
    train_set, _ = gaussian_data
    model = train_multichannel([train_set.X], train_set.Y, small_config, train_set.class_names)
    for a, b in zip(model.matrices(), small_model.matrices()):
        np.testing.assert_array_equal(a, b)


def test_silent_channel_does_not_break_training(gaussian_data, small_config, small_model):
    train_set, test_set = gaussian_data
    blank = np.zeros((len(train_set), 3))
    model = train_multichannel([train_set.X, blank], train_set.Y, small_config, train_set.class_names)
    assert model.layer_sizes == (11, 40, 40, 2)
    assert [c.input_width for c in model.channels] == [8, 3]
    assert not np.any(model.channels[1].inhibitory_weights[0])
    assert audit_model(model).passed
    X_test = np.hstack([test_set.X, np.zeros((len(test_set), 3))])
    baseline = accuracy(predict(small_model, test_set.X), test_set.labels)
    assert accuracy(predict(model, X_test), test_set.labels) >= baseline - 0.02


def test_channels_split_the_attributes(gaussian_data, small_config):
    train_set, test_set = gaussian_data
    model = train_multichannel(
        [train_set.X[:, :5], train_set.X[:, 5:]], train_set.Y, small_config, train_set.class_names
    )
    assert model.layer_sizes == (8, 40, 40, 2)
    assert encode(model, test_set.X).shape == (len(test_set), 40)
    with pytest.raises(ArgumentError):
        _ = model.inhibitory_weights
    assert accuracy(predict(model, test_set.X), test_set.labels) >= 0.9


def test_model_network_steady_state_matches_forward(small_model, gaussian_data):
    _, test_set = gaussian_data
    for x in test_set.X[:5]:
        net = model_to_network(small_model, x)
        assert validate_network(net).passed
        q = solve_steady_state(net).q
        np.testing.assert_allclose(q[-2:], forward(small_model, x)[0], atol=1e-9)


def test_slann_forward_without_input():
    W2 = np.array([[0.2, -0.1], [0.3, 0.4]])
    out = slann_forward(np.ones((3, 2)), W2, 0.5, np.zeros((4, 3)))
    np.testing.assert_allclose(out, np.tile(W2.sum(axis=0), (4, 1)))


def test_slann_forward_large_alpha(rng):
    W1, W2 = rng.random((5, 4)), rng.normal(size=(4, 3))
    X = rng.random((6, 5))
    out = slann_forward(W1, W2, 1e6, X)
    np.testing.assert_allclose(out, np.tile(W2.sum(axis=0), (6, 1)), atol=1e-4)


def test_slann_forward_matches_loop(rng):
    W1, W2, X = rng.random((4, 3)), rng.normal(size=(3, 2)), rng.random((5, 4))
    alpha = 0.7
    out = slann_forward(W1, W2, alpha, X)
    for d in range(5):
        for k in range(2):
            total = 0.0
            for j in range(3):
                z = sum(X[d, i] * W1[i, j] for i in range(4))
                total += alpha / (alpha + z) * W2[j, k]
            assert out[d, k] == pytest.approx(total, abs=1e-12)


def test_slann_forward_rejects_bad_arguments():
    with pytest.raises(ArgumentError):
        slann_forward(np.ones((2, 2)), np.ones((2, 1)), 0.0, np.ones((1, 2)))
    with pytest.raises(ArgumentError):
        slann_forward(-np.ones((2, 2)), np.ones((2, 1)), 1.0, np.ones((1, 2)))


def test_odd_hidden_width_is_rejected(gaussian_data):
    train_set, _ = gaussian_data
    with pytest.raises(ArgumentError):
        train(train_set, TrainConfig(hidden_layer_sizes=(20, 41)))


def test_config_validation():
    with pytest.raises(ArgumentError):
        TrainConfig.build(hidden_layer_sizes=(0, 10))
    with pytest.raises(ArgumentError):
        TrainConfig.build(slann_weight_scale=2.0)


@pytest.mark.parametrize("sizes,layer", [((20, 40), 1), ((40,), 1)])
def test_all_zero_data_fails_training(sizes, layer):
    data = LabeledDataset(np.zeros((10, 4)), one_hot(np.arange(10) % 2, 2))
    with pytest.raises(TrainingError) as info:
        train(data, TrainConfig(hidden_layer_sizes=sizes))
    assert info.value.layer == layer


def test_permuting_classes_permutes_outputs(gaussian_data, small_config, small_model):
    train_set, test_set = gaussian_data
    flipped = train(LabeledDataset(train_set.X, train_set.Y[:, ::-1]), small_config)
    np.testing.assert_allclose(forward(flipped, test_set.X), forward(small_model, test_set.X)[:, ::-1], atol=1e-12)
    np.testing.assert_array_equal(predict(flipped, test_set.X), 1 - predict(small_model, test_set.X))


def test_input_width_is_checked(small_model):
    with pytest.raises(ArgumentError):
        forward(small_model, np.zeros((2, 7)))
    with pytest.raises(ArgumentError):
        forward(small_model, -np.ones((1, 8)))


def test_confusion_matrix_and_accuracy():
    labels = np.array([0, 0, 1, 1, 2])
    predicted = np.array([0, 1, 1, 1, 0])
    np.testing.assert_array_equal(
        confusion_matrix(labels, predicted, 3),
        [[1, 1, 0], [0, 2, 0], [1, 0, 0]],
    )
    assert accuracy(predicted, labels) == pytest.approx(0.6)
    with pytest.raises(ArgumentError):
        accuracy(predicted, labels[:3])


def test_dataset_rejects_negative_attributes():
    with pytest.raises(ArgumentError):
        LabeledDataset(-np.ones((2, 2)), np.eye(2))


@pytest.mark.slow
def test_handwritten_digits():
    datasets = pytest.importorskip("sklearn.datasets")
    digits = datasets.load_digits()
    train_rows, test_rows = split_rows(digits.data.shape[0], 0.25, seed=0)
    stats = NormalizationStats.fit(digits.data[train_rows])
    Y = one_hot(digits.target, 10)
    train_set = LabeledDataset(stats.apply(digits.data[train_rows]), Y[train_rows])
    model = train(train_set, TrainConfig(hidden_layer_sizes=(100, 1000), seed=0))
    predicted = predict(model, stats.apply(digits.data[test_rows]))
    assert accuracy(predicted, digits.target[test_rows]) >= 0.9
