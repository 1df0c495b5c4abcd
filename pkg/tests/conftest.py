import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def bundled():
    from opca import acceptance

    return acceptance.bundled()


@pytest.fixture(scope="session")
def shift8(bundled):
    return bundled["shift-qubit-Z8"]
