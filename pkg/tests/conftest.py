import json
from pathlib import Path

import pytest
from hypothesis import settings

from moment_kernel import Discrete, SpectralDensity
from moment_kernel.oracle import ACCEPTANCE_MODES

settings.register_profile("repo", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("repo")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures():
    return FIXTURES


@pytest.fixture(scope="session")
def acceptance_sd():
    """Two-mode acceptance bath at beta = 1 as a discrete spectral density."""
    return SpectralDensity(Discrete.from_modes(ACCEPTANCE_MODES), 1.0)


@pytest.fixture(scope="session")
def golden_moments():
    return json.loads((FIXTURES / "oracle_moments.json").read_text())


@pytest.fixture(scope="session")
def dephasing_reference():
    return json.loads((FIXTURES / "dephasing_reference.json").read_text())
