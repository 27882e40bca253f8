from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from closure14.series import Multipliers

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def sample_point():
    """lam = 2, lam_vec = (1,0,0), mu_mat = diag(1,0,0), everything else zero."""
    F = Fraction
    return Multipliers(F(0), F(2), (F(0), F(0), F(0)),
                       ((F(1), F(0), F(0)), (F(0), F(0), F(0)), (F(0), F(0), F(0))),
                       (F(1), F(0), F(0)))
