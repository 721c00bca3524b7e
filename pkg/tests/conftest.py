"""Shared fixtures for dptrack tests."""

import numpy as np
import pytest
import yaml

from dptrack.core.config import DptrackConfig, set_config
from dptrack.core.objectives import make_rendezvous, make_ridge
from dptrack.core.topology import make_ring_weights
from helpers import SQUARE_TARGETS


@pytest.fixture
def ring():
    return make_ring_weights(0.3, 0.5)


@pytest.fixture
def square():
    return make_rendezvous(SQUARE_TARGETS)


@pytest.fixture
def ridge():
    return make_ridge(4, 2, 1.0, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def config_data():
    """A small rendezvous experiment on the four-agent ring."""
    return {
        "problem": {"rendezvous": {"targets": SQUARE_TARGETS}},
        "topology": {"ring": {"r": 0.3, "d": 0.5}},
        "schedule": {"alpha": 0.05, "gamma": 1.0, "p": 0.0, "q": 0.3, "m": 1.0},
        "noise": {"scale": {"b_eta": 0.05, "b_xi": 0.05}},
        "horizon": 200,
        "trials": 3,
        "seed": 11,
    }


@pytest.fixture
def write_config(tmp_path):
    """Write a config mapping to YAML and return its path."""

    def _write(data: dict, name: str = "experiment.yaml"):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data))
        return path

    return _write


@pytest.fixture(autouse=True)
def isolated_runs(tmp_path):
    """Default run directories go under the test's temp dir."""
    set_config(DptrackConfig(base_dir=tmp_path / "runs"))
    yield
    set_config(None)
