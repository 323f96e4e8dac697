import pytest

CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion under its number."""

    def mark(number: int, title: str):
        CRITERIA[number] = [title, request.node.nodeid, None]

    yield mark


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call":
        return
    for entry in CRITERIA.values():
        if entry[1] == item.nodeid:
            entry[2] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        title, _, passed = CRITERIA[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title}")
