import numpy as np
import pytest

from nnsquant.shape_model import make_synthetic_model


@pytest.fixture(scope="session")
def model():
    """Small deterministic shape model shared across tests."""
    return make_synthetic_model(num_vertices=100, num_components=5, seed=7)


@pytest.fixture(scope="session")
def wide_model():
    """Model with more components (trajectory synthesis needs >= 3)."""
    return make_synthetic_model(num_vertices=120, num_components=6, seed=13)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
