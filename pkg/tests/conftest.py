import pytest

_CRITERIA: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, summary): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, summary = marker.args
    status = "XFAIL" if hasattr(report, "wasxfail") else ("PASS" if report.passed else "FAIL")
    _CRITERIA[f"{number}:{item.name}"] = (status, f"criterion {number}: {summary}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: (float(k.split(":")[0]), k)):
        status, text = _CRITERIA[key]
        terminalreporter.write_line(f"[{status}] {text}")
