import numpy as np
import pytest

from odpca import SyntheticSource, make_spiked_model
from odpca.datagen import default_spikes

DEFAULT_MODEL_SEED = 424242


@pytest.fixture(scope="session")
def default_model():
    """Desk-scale spiked model: d=50, K=5, spikes 10..6 over a unit bulk."""
    return make_spiked_model(50, 5, default_spikes(5), 1.0, DEFAULT_MODEL_SEED)


@pytest.fixture(scope="session")
def default_source(default_model):
    return SyntheticSource(default_model)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
