import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

SEED = 20240611
TRIALS = 200


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)
