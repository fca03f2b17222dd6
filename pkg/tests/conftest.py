import sys

import numpy as np
import pytest
from hypothesis import settings

from mcan_nav.attractor import NetworkParams

settings.register_profile("repo", deadline=None, max_examples=50)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def sheet_params():
    """Tuned position-sheet parameters."""
    from mcan_nav.defaults import POSITION_PARAMS

    return POSITION_PARAMS


@pytest.fixture(scope="session")
def ring_params():
    """Tuned head-direction parameters."""
    from mcan_nav.defaults import HD_PARAMS

    return HD_PARAMS


@pytest.fixture
def small_params():
    return NetworkParams(activation_radius=3, excitation_radius=3, motion_confidence=1.0, inhibition_factor=1e-4)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion that ran."""
    module = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number].line())
