import warnings

import numpy as np
import pytest

from sweyl.grid import BoxWarning, make_grid


@pytest.fixture(autouse=True)
def _quiet_box_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoxWarning)
        yield


@pytest.fixture
def grid128():
    return make_grid(128, -12, 12)


@pytest.fixture
def grid64():
    return make_grid(64, -8, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
