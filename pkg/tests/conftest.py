import re

_CRITERIA: dict[int, dict] = {}
_NODE: dict[str, int] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion exercised by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            n, title = m.args
            _NODE[item.nodeid] = n
            _CRITERIA.setdefault(n, {"title": title, "passed": 0, "failed": 0})


def pytest_runtest_logreport(report):
    n = _NODE.get(report.nodeid)
    if n is None:
        return
    if report.failed:
        _CRITERIA[n]["failed"] += 1
    elif report.when == "call" and report.passed:
        _CRITERIA[n]["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        c = _CRITERIA[n]
        ran = c["passed"] + c["failed"]
        status = "PASS" if c["failed"] == 0 and ran else ("FAIL" if c["failed"] else "NOT RUN")
        tr.write_line(f"criterion {n:2d}  {status:7s} {c['title']}  ({c['passed']}/{ran} tests)")
