import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, title, failures)."""

    def record(number, title, failures, detail=""):
        status = "PASS" if not failures else "FAIL"
        line = f"criterion {number:>2} {status}: {title}"
        if detail:
            line += f" [{detail}]"
        if failures:
            line += " -- " + "; ".join(failures)
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
