import os

import pytest

_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record an acceptance criterion's outcome for the end-of-run summary."""
    def record(label):
        _CRITERIA[request.node.nodeid] = [label, "FAIL"]
    yield record
    if request.node.nodeid in _CRITERIA and getattr(request.node, "rep_call", None) is not None:
        _CRITERIA[request.node.nodeid][1] = "PASS" if request.node.rep_call.passed else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in sorted(_CRITERIA.values()):
        terminalreporter.write_line(f"[{status}] {label}")


@pytest.fixture
def running_as_root():
    return hasattr(os, "geteuid") and os.geteuid() == 0
