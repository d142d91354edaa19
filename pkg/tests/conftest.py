import importlib

import pytest

from trendvis import _kernels_py
from trendvis.model import Trajectory

# The four worked trajectories: (minute, rank) pairs.
PAPER_TRAJECTORIES = {
    1: [(1, 40), (2, 30), (3, 50)],
    2: [(10, 40), (11, 40), (12, 30), (13, 30), (14, 50), (15, 50)],
    3: [(27, 40), (28, 30), (29, 30), (30, 50), (31, 40), (32, 50)],
    4: [(27, 40), (28, 30), (29, 30), (30, 50), (31, 40), (32, 20)],
}


@pytest.fixture
def paper():
    return {k: Trajectory.from_pairs(f"traj{k}", v) for k, v in PAPER_TRAJECTORIES.items()}


def _available_backends():
    mods = [_kernels_py]
    try:
        mods.append(importlib.import_module("trendvis._kernels"))
    except ImportError:
        pass
    return mods


BACKENDS = _available_backends()
# the package re-exports a function named `visibility`, shadowing the submodule attribute
_PATCHED = [importlib.import_module("trendvis.visibility"), importlib.import_module("trendvis.regression")]


@pytest.fixture(params=BACKENDS, ids=lambda m: m.BACKEND)
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    for mod in _PATCHED:
        monkeypatch.setattr(mod, "kernels", request.param)
    return request.param


_acceptance: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion, reported in the summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    label = dict(report.user_properties).get("acceptance")
    if label is not None:
        _acceptance.append((label, report.outcome.upper(), report.nodeid.split("::")[-1]))


@pytest.fixture(autouse=True)
def _record_acceptance(request):
    marker = request.node.get_closest_marker("acceptance")
    if marker is not None:
        request.node.user_properties.append(("acceptance", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome, name in sorted(_acceptance, key=lambda r: (int(r[0].split()[0]), r[2])):
        verdict = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"{verdict}  criterion {label}  [{name}]")
