import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rnnkit.controllers.cells import (
    cluster_activation,
    cluster_network,
    first_order_approx,
    layer_activation,
    lrnn_e,
    lrnn_i,
    lrnn_i_approx,
    phi_cell,
)
from rnnkit.controllers.steady_state import solve_steady_state, validate_network
from rnnkit.exceptions import ArgumentError
from rnnkit.models.kernel import ActivationParams

rates = st.floats(0.0, 50.0, allow_nan=False)


@pytest.mark.parametrize(
    "x_plus,x_minus,lam,r,expected",
    [
        (0.5, 0.0, 0.0, 1.0, 0.5),
        (0.0, 1.0, 1.0, 1.0, 0.5),
        (3.0, 0.0, 0.0, 1.0, 1.0),
        (0.2, 0.0, 0.0, 0.0, 1.0),
        (0.0, 0.0, 0.0, 0.0, 0.0),
    ],
)
def test_phi_cell_examples(x_plus, x_minus, lam, r, expected):
    assert phi_cell(x_plus, x_minus, ActivationParams(lambda_plus=lam, r=r)) == pytest.approx(expected)


def test_phi_cell_is_elementwise():
    out = phi_cell(np.array([[0.1, 0.4], [2.0, 0.0]]), np.zeros((2, 2)), ActivationParams(r=1.0))
    np.testing.assert_allclose(out, [[0.1, 0.4], [1.0, 0.0]])


def test_negative_inputs_are_rejected():
    with pytest.raises(ArgumentError):
        phi_cell(-0.1, 0.0)
    with pytest.raises(ArgumentError):
        cluster_activation(0.0, -1.0)
    with pytest.raises(ArgumentError):
        ActivationParams.build(r=-1.0)


def test_layer_activation_uses_per_cell_rates():
    out = layer_activation(np.zeros((1, 3)), np.array([[1.0, 1.0, 0.0]]), np.array([1.0, 2.0, 0.0]), np.array([1.0, 2.0, 0.0]))
    np.testing.assert_allclose(out, [[0.5, 2.0 / 3.0, 0.0]])


@settings(max_examples=200)
@given(x_plus=rates, x_minus=rates, lam=rates, r=rates, bump=st.floats(0.0, 5.0))
def test_phi_cell_is_bounded_and_monotone(x_plus, x_minus, lam, r, bump):
    params = ActivationParams(lambda_plus=lam, r=r)
    value = phi_cell(x_plus, x_minus, params)
    assert 0.0 <= value <= 1.0
    assert phi_cell(x_plus + bump, x_minus, params) >= value
    if r + x_minus > 0:
        assert phi_cell(x_plus, x_minus + bump, params) <= value


def test_lrnn_cells():
    np.testing.assert_allclose(lrnn_e(np.array([0.0, 0.3, 1.7])), [0.0, 0.3, 1.0])
    assert lrnn_i(1.0) == pytest.approx(0.5)
    assert lrnn_i_approx(0.05) == pytest.approx(0.95)
    assert lrnn_i_approx(2.0) == 0.0


def test_first_order_approximation():
    assert first_order_approx(1.0, 0.0, 1.0, 0.0, 0.05) == pytest.approx(0.95)
    assert first_order_approx(0.0, 0.3, 2.0, 0.0, 0.7) == 0.0
    exact = lrnn_i(0.05)
    assert abs(exact - first_order_approx(1.0, 0.0, 1.0, 0.0, 0.05)) <= 0.05**2


def test_first_order_requires_positive_rate():
    with pytest.raises(ArgumentError):
        first_order_approx(1.0, 0.0, 0.0, 0.0, 0.1)


def test_first_order_warns_outside_regime(caplog):
    with caplog.at_level(logging.WARNING, logger="rnnkit.controllers.cells"):
        first_order_approx(1.0, 0.0, 1.0, 0.0, 0.5, check_regime=True)
    assert "first-order approximation" in caplog.text


def test_cluster_activation_examples():
    assert cluster_activation(0.0, 0.0) == 1.0
    assert cluster_activation(0.02, 0.0) == pytest.approx(1.0 / 1.02)
    assert abs(cluster_activation(0.02, 0.0) - 0.98) <= 4e-4
    assert cluster_activation(0.0, 0.5) == 1.0


@settings(max_examples=200)
@given(x_plus=st.floats(0.0, 0.1), x_minus=st.floats(0.0, 0.1))
def test_cluster_activation_tracks_relu(x_plus, x_minus):
    value = cluster_activation(x_plus, x_minus)
    assert 0.0 <= value <= 1.0
    assert abs(value - (1.0 - max(x_plus - x_minus, 0.0))) <= x_plus**2 + 1e-15


def test_cluster_network_reproduces_activation(rng):
    for _ in range(10):
        x = rng.random(6)
        w = rng.uniform(-1.0, 1.0, 6)
        w = w / np.abs(w).sum() * 0.1
        net = cluster_network(x, w)
        assert validate_network(net).passed
        q = solve_steady_state(net).q
        expected = cluster_activation(x @ np.maximum(w, 0.0), x @ np.maximum(-w, 0.0))
        assert q[-1] == pytest.approx(expected, abs=1e-9)


def test_cluster_network_rejects_heavy_weights():
    with pytest.raises(ArgumentError):
        cluster_network(np.ones(2), np.array([0.8, -0.8]))
