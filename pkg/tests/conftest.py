import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from siegelkit.decomp import real_matrix

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def random_invertible(rng, n, low=-10.0, high=10.0, min_det=1e-3, precision=128):
    """Uniform entries in [low, high], rejected until |det| >= min_det."""
    while True:
        a = rng.uniform(low, high, (n, n))
        if abs(np.linalg.det(a)) >= min_det:
            return real_matrix(a.tolist(), precision)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
