import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from perc3d import set_backend


@pytest.fixture
def numpy_backend():
    set_backend("numpy")
    yield
    set_backend(None)


@pytest.fixture
def each_backend(request):
    set_backend(request.param)
    yield request.param
    set_backend(None)


_ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = re.search(r"test_acceptance\.py::test_c(\d+)", report.nodeid)
    if m:
        _ACCEPTANCE_RESULTS[int(m.group(1))] = (report.outcome, report.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE_RESULTS):
        outcome, nodeid = _ACCEPTANCE_RESULTS[num]
        word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            outcome, outcome.upper())
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"criterion {num:2d}: {word}  ({name})")
