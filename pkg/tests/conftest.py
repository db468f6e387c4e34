import pytest

_results: dict[str, str] = {}
_order: list[str] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): an acceptance criterion, reported in the summary")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m and m.args[0] not in _order:
            _order.append(m.args[0])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    label = m.args[0]
    if report.when == "call" or (report.when == "setup" and report.failed):
        _results[label] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _order:
        return
    terminalreporter.section("acceptance criteria")
    for label in _order:
        terminalreporter.write_line(f"{_results.get(label, 'NOT RUN'):<8} {label}")
