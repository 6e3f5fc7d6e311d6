import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _criteria[item.nodeid] = [mark.args[0], mark.args[1], "NOT RUN", 0.0]


def pytest_runtest_logreport(report):
    row = _criteria.get(report.nodeid)
    if row is None:
        return
    if report.when == "call" or report.outcome != "passed":
        if report.failed:
            row[2] = "FAIL"
        elif report.skipped:
            row[2] = "SKIP"
        elif report.when == "call":
            row[2] = "PASS"
        row[3] += report.duration


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, secs in sorted(_criteria.values()):
        terminalreporter.write_line(f"criterion {number}: {status}  {title} ({secs:.1f}s)")
