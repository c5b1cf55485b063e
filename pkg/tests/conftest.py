"""Shared fixtures."""
from pathlib import Path

import numpy as np
import pytest

from rnnkit.controllers.mlrnn import train
from rnnkit.models.mlrnn import LabeledDataset, NormalizationStats, TrainConfig, one_hot
from rnnkit.models.network import RnnNetwork
from rnnkit.utils.data_loader import split_rows
from rnnkit.utils.synthetic import two_gaussians

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def isolated_net() -> RnnNetwork:
    return RnnNetwork.isolated(Lambda=0.5, r=1.0)


@pytest.fixture
def mutual_inhibition_net() -> RnnNetwork:
    return RnnNetwork(
        W_plus=np.zeros((2, 2)),
        W_minus=np.array([[0.0, 1.0], [1.0, 0.0]]),
        r=np.ones(2),
        Lambda_plus=np.full(2, 0.5),
        lambda_minus=np.zeros(2),
    )


def gaussian_split(seed: int = 0, test_fraction: float = 0.25):
    X, labels = two_gaussians(count=400, dims=8, separation=3.0, seed=seed)
    train_rows, test_rows = split_rows(X.shape[0], test_fraction, seed)
    stats = NormalizationStats.fit(X[train_rows])
    Y = one_hot(labels, 2)
    names = ("class0", "class1")
    return (
        LabeledDataset(stats.apply(X[train_rows]), Y[train_rows], names),
        LabeledDataset(stats.apply(X[test_rows]), Y[test_rows], names),
    )


@pytest.fixture(scope="session")
def gaussian_data():
    return gaussian_split()


@pytest.fixture(scope="session")
def small_config() -> TrainConfig:
    return TrainConfig(hidden_layer_sizes=(20, 40), seed=3)


@pytest.fixture(scope="session")
def small_model(gaussian_data, small_config):
    train_set, _ = gaussian_data
    return train(train_set, small_config)
