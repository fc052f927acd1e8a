import numpy as np
import pytest

from dressed_rayleigh.jc_core import SystemParams


@pytest.fixture
def detuned_params():
    """Large-detuning workhorse: rabi/|detuning| = 0.02."""
    return SystemParams(omega_sm=100.0, omega_tls=110.0, rabi=0.2, gamma0=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
