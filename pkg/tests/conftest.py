import importlib

import numpy as np
import pytest

from edgeperf import _kernels_py, kernels

ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        ACCEPTANCE_RESULTS[report.nodeid.split("::")[-1]] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.failed:
        ACCEPTANCE_RESULTS[report.nodeid.split("::")[-1]] = "failed"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        outcome = ACCEPTANCE_RESULTS[name]
        word = "PASS" if outcome == "passed" else "FAIL"
        num = name.split("_")[2]
        terminalreporter.write_line(f"criterion {int(num):>2}: {word}  ({name})")


def _backends():
    out = ["python"]
    try:
        importlib.import_module("edgeperf._kernels")
        out.append("cython")
    except ImportError:
        pass
    return out


@pytest.fixture(params=_backends())
def backend(request, monkeypatch):
    """Run the test once per available selection kernel."""
    mod = _kernels_py if request.param == "python" else importlib.import_module("edgeperf._kernels")
    monkeypatch.setattr(kernels, "select_p1", mod.select_p1)
    monkeypatch.setattr(kernels, "select_p2", mod.select_p2)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
