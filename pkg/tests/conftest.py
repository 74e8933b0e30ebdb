import numpy as np
import pytest

from kinosynth.controls import dubins_set
from kinosynth.geometry import config_from_xytheta


@pytest.fixture(scope="session")
def dubins():
    return dubins_set()


def cfg(x, y, th=0.0):
    return config_from_xytheta(x, y, th)


@pytest.fixture
def origin_goal():
    return cfg(0.0, 0.0, 0.0)
