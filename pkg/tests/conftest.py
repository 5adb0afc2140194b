import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from isosections.integral_geometry import default_constants
from isosections.quadrature import build_sphere_quadrature

settings.register_profile(
    "default", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def quad3():
    return build_sphere_quadrature(3)


@pytest.fixture(scope="session")
def coarse3():
    return build_sphere_quadrature(3, 6)


@pytest.fixture(scope="session")
def constants3():
    return default_constants(3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
