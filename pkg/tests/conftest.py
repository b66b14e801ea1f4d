import pytest

# (number, title) -> list of outcomes of the tests carrying that criterion mark
_CRITERIA: dict = {}
# same key -> measured quantities worth printing next to the verdict
_DETAILS: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    key = tuple(mark.args)
    if report.when == "setup":
        _CRITERIA.setdefault(key, [])
    if report.failed or (report.when == "call"):
        _CRITERIA.setdefault(key, []).append(report.passed and not report.failed)


@pytest.fixture
def detail(request):
    """Record a measured value shown next to the criterion's verdict."""
    mark = request.node.get_closest_marker("criterion")
    key = tuple(mark.args)

    def note(text):
        _DETAILS.setdefault(key, []).append(text)

    return note


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), results in sorted(_CRITERIA.items()):
        status = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}")
        for text in _DETAILS.get((number, title), []):
            terminalreporter.write_line(f"              {text}")
