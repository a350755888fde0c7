import pytest

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def acceptance_log(request):
    lines = request.config.stash[_LINES_KEY]

    def record(criterion, ok, detail):
        status = "PASS" if ok is True else ("FAIL" if ok is False else str(ok))
        lines.append(f"[{status}] {criterion}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
