import os
import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    n, text = mark.args
    _criteria[n] = (text, rep.passed, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        text, ok, secs = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}  ({secs:.1f} s)")


@pytest.fixture(scope="session")
def ford200():
    from bagame.horoballs import generate_ford

    return generate_ford(200)


@pytest.fixture(scope="session")
def ford50():
    from bagame.horoballs import generate_ford

    return generate_ford(50)


@pytest.fixture
def unit_window():
    from bagame.metric import IntervalPlayfield, real_window

    return IntervalPlayfield(real_window(0, 1))


HALF = Fraction(1, 2)
