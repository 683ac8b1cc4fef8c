import warnings

import numpy as np
import pytest

from darbouxlab.darboux import DarbouxParams
from darbouxlab.errors import ConditioningWarning


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def generic_params():
    """Non-terminating parameters with a genuinely complex modulus."""
    return DarbouxParams(0.2, 0.3, 0.1, 1.4, 0.6 + 0.3j)


@pytest.fixture
def lame_sn():
    """Exponents for which ``sn u`` solves the equation at ``h = 1 + k^2``."""
    return DarbouxParams(0, -1, -1, 1, 0.5)


@pytest.fixture(autouse=True)
def _quiet_conditioning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        yield
