import math

import pytest

from tdm_doppler.config import SPEED_OF_LIGHT, RadarParams

LAMBDA = SPEED_OF_LIGHT / 77e9
T_C = 42.67e-6
SMALL = RadarParams(n_samples=128, n_chirps=32, n_tx=4, n_rx=4)


@pytest.fixture
def table1():
    """12 TX / 8 RX array with the simulated waveform, d_r = lambda/2, d_t = 2 lambda."""
    return RadarParams()


@pytest.fixture
def small():
    """Reduced cube for fast pipeline tests."""
    return SMALL


def wrap(x):
    return math.atan2(math.sin(x), math.cos(x))
