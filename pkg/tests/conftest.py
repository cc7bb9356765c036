import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import build_mdp_i, build_mdp_ii, truth_i, truth_ii  # noqa: E402


@pytest.fixture(scope="session")
def mdp_i():
    return build_mdp_i()


@pytest.fixture(scope="session")
def mdp_ii():
    return build_mdp_ii()


@pytest.fixture(scope="session")
def ground_truth_i():
    return truth_i()


@pytest.fixture(scope="session")
def ground_truth_ii():
    return truth_ii()
