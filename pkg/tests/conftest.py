import pytest

_verdicts = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        verdict = {"passed": "PASS", "skipped": "SKIP"}.get(report.outcome, "FAIL")
        _verdicts.append((number, title, verdict, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, verdict, duration in sorted(_verdicts, key=lambda v: str(v[0])):
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {title} ({duration:.1f}s)")
