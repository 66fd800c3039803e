import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("lakit", max_examples=40, deadline=None)
settings.load_profile("lakit")

CRITERIA = range(1, 11)
_outcomes: dict[int, list[tuple[str, str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if hasattr(rep, "wasxfail"):
            status = "xfail"
        else:
            status = "pass" if rep.passed else "fail"
        _outcomes.setdefault(n, []).append((item.name, status, getattr(rep, "wasxfail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in CRITERIA:
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n:2d}: NOT RUN")
            continue
        bad = [r for r in results if r[1] != "pass"]
        if not bad:
            tr.write_line(f"criterion {n:2d}: PASS ({len(results)} tests)")
            continue
        why = "; ".join(f"{name} {status}" + (f" ({reason})" if reason else "") for name, status, reason in bad)
        tr.write_line(f"criterion {n:2d}: FAIL: {why}")
