import numpy as np
import pytest

from ssmcascade import cascade
from ssmcascade.lti import DiscreteLTI, hippo_system

HIPPO_D1 = 0.999000499750125
HIPPO_D100 = 0.9507437210436478


def scalar_system(a=0.5, b=1.0, c=1.0, d=0.0) -> DiscreteLTI:
    return DiscreteLTI([[a]], [[b]], [[c]], [[d]])


def rel_err(a, b) -> float:
    a = getattr(a, "data", a)
    b = getattr(b, "data", b)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(b))


@pytest.fixture(scope="session")
def hippo():
    """Bilinear HiPPO system, m=100, delta=5e-4, B=ones, C=ones/m, D=0."""
    return hippo_system(100, 5e-4)


@pytest.fixture(scope="session")
def hippo_plan(hippo):
    return cascade.plan(hippo, 1e-12)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
