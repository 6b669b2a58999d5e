import os

import pytest
from hypothesis import HealthCheck, settings

from torus_npoint.voa import LatticeData

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for name, value in report.user_properties:
        if name == "criterion":
            number, text = value
            _CRITERIA[number] = (text, report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        text, outcome, duration = _CRITERIA[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {text}  ({duration:.2f}s)")


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    number, text = marker.args
    request.node.user_properties.append(("criterion", (number, text)))
    return number


@pytest.fixture(scope="session")
def rank1():
    return LatticeData([[2]])


@pytest.fixture(scope="session")
def rank1_exact():
    return LatticeData([[4]])


@pytest.fixture(scope="session")
def rank2_exact():
    return LatticeData([[16, 4], [4, 2]])


@pytest.fixture(scope="session")
def a2():
    return LatticeData([[2, -1], [-1, 2]])
