import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("pencildae", deadline=None, max_examples=30, derandomize=True)
settings.load_profile("pencildae")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def jordan2():
    from pencildae import certify_regular
    return certify_regular(np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("]")[1].split(".")[0])):
        terminalreporter.write_line(line)
