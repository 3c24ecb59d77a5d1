import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fblmimo.channel import SystemConfig

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Gram eigenvalues of one stored 4x4 Rayleigh draw (rho = 10 dB).
FIXTURE_EIGS = np.array([9.155386903181693, 4.119441109521417, 0.44885914710021185, 0.21289123120095843])

# A stored 2x2 channel matrix used with rho = 10 (linear).
FIXTURE_H2 = np.array([
    [-0.008279435761130506 - 0.08931988824532262j, 0.12653231762823797 - 1.0740047571183227j],
    [-0.09097618850837126 + 0.23343112134923588j, -0.8263979865096416 - 0.8576812842734497j],
])


@pytest.fixture
def fixture_cfg():
    return SystemConfig.from_db(4, 4, 10.0)


@pytest.fixture
def fixture_eigs():
    return FIXTURE_EIGS.copy()
