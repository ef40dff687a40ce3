import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record ``(number, passed, detail)`` and print it as one line."""

    def record(number, passed, detail):
        line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} | {detail}"
        _LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
