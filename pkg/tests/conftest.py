"""
Shared fixtures for the test suite.
"""
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest

from tests.helpers import make_dataset


@pytest.fixture
def toy_separable():
    """200 rows, two features, label = x0 > 0.1."""
    rng = np.random.default_rng(7)
    x = rng.uniform(-1, 1, size=(200, 2))
    y = (x[:, 0] > 0.1).astype(np.int8)
    return make_dataset(x, y)


@pytest.fixture
def small_params():
    from src.gbdt import BoostParams

    return BoostParams(num_boost_round=60, early_stopping_rounds=20, min_data_in_leaf=5, verbose_every=0)
