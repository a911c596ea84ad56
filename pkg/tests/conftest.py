import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mimophase.catalog import FREQUENCYWISE_CRAMPED_2X2, HALF_CRAMPED_2X2  # noqa: E402
from mimophase.sslti import StateSpace, minimal_realization, realize  # noqa: E402
from mimophase.tfparse import parse_transfer_matrix  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def cramped_2x2():
    return minimal_realization(realize(parse_transfer_matrix(FREQUENCYWISE_CRAMPED_2X2)))


@pytest.fixture(scope="session")
def half_cramped_2x2():
    return minimal_realization(realize(parse_transfer_matrix(HALF_CRAMPED_2X2)))


def tf(text):
    return realize(parse_transfer_matrix(text))


def static(D):
    return StateSpace.static(np.atleast_2d(np.asarray(D)))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    RESULTS = getattr(mod, "RESULTS", None)
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
