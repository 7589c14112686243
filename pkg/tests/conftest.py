import pytest

_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line: report(tag, title, passed, detail)."""
    def rec(tag, title, passed, detail=""):
        _LINES.append((tag, f"{tag} {'PASS' if passed else 'FAIL'}  {title}  [{detail}]"))
        print(_LINES[-1][1])
        return passed
    return rec


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES, key=lambda t: int(t[0][1:])):
        terminalreporter.write_line(line)
