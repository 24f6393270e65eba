import pytest

_ACCEPTANCE = {}


@pytest.fixture
def record_criterion():
    """Store one summary line per acceptance criterion for the terminal report."""

    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        _ACCEPTANCE[number] = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
