"""Collects acceptance-criterion outcomes and prints one PASS/FAIL line per criterion."""

from __future__ import annotations

import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when != "call" and not (rep.failed or rep.skipped):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "checks": {}})
    passed = rep.passed and not rep.skipped
    prev = entry["checks"].get(item.name, True)
    entry["checks"][item.name] = prev and passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        failed = [name for name, ok in entry["checks"].items() if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"{status}  criterion {number:>2}: {entry['title']}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        tr.write_line(line)
