import pytest

_LINES = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Usage: ``criterion(n, label, ok)``; the line is printed immediately and
    repeated in the terminal summary, then the test asserts ``ok``.
    """
    called = []

    def record(number, label, ok, note=""):
        called.append(number)
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {label}"
        if note:
            line += f" ({note})"
        print(line)
        _LINES.append(line)
        assert ok, line

    yield record
    if not called:
        line = f"FAIL {request.node.name}: raised before reaching its verdict"
        _LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
