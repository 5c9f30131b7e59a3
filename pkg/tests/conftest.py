"""Per-criterion summary for the acceptance suite.

Tests tagged ``@pytest.mark.criterion(id, title)`` are grouped by id; the
terminal summary prints one PASS/FAIL line per criterion.
"""
from collections import OrderedDict

import pytest

_criteria: "OrderedDict[str, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion this test checks")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        cid, title = mark.args
        entry = _criteria.setdefault(cid, {"title": title, "outcomes": {}})
        entry["outcomes"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _criteria.values():
        if report.nodeid not in entry["outcomes"]:
            continue
        if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
            entry["outcomes"][report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    ran = {k: v for k, v in _criteria.items() if any(o is not None for o in v["outcomes"].values())}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for cid, entry in ran.items():
        outcomes = [o for o in entry["outcomes"].values() if o is not None]
        failed = [n.split("::")[-1] for n, o in entry["outcomes"].items() if o == "failed"]
        status = "PASS" if outcomes and all(o == "passed" for o in outcomes) else "FAIL"
        line = f"CRITERION {cid:>2}: {status}  {entry['title']}"
        if failed:
            line += f"  [failed: {', '.join(failed)}]"
        terminalreporter.write_line(line)
