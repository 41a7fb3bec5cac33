import sys

import numpy as np
import pytest

from rawbench.core import CameraProfile


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def profile():
    return CameraProfile()


@pytest.fixture
def noise_free_profile():
    return CameraProfile(lambda_shot=0.0, lambda_read=0.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
