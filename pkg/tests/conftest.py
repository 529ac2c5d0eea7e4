import numpy as np
import pytest

from homoclinic_gl.model import SystemParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_params(rng, s_range=(1.2, 4.0)):
    return SystemParams(
        s=float(rng.uniform(*s_range)),
        beta1=float(rng.uniform(-3, 3)),
        beta2=float(rng.uniform(-3, 3)),
        beta3=float(rng.uniform(-0.5, 0.5)),
        beta4=float(rng.uniform(-3, 3)),
        nu1=float(rng.uniform(-0.5, 0.5)),
    )


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
