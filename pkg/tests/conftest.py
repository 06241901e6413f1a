import math

import numpy as np
import pytest

from sdop.geometry import Ball, SetFamily

SQ3 = math.sqrt(3.0)


@pytest.fixture
def nonempty_family():
    return SetFamily([Ball((-1, 0), 2), Ball((1, 0), 1), Ball((0, -2), 2)])


@pytest.fixture
def empty_family():
    return SetFamily([Ball((-SQ3, 0), 1), Ball((SQ3, 0), 1), Ball((0, -3), 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


# one pass/fail line per acceptance criterion at the end of the run
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    ok = call.excinfo is None
    prev = _CRITERIA.get(number, (title, True))
    _CRITERIA[number] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
