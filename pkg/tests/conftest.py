import pytest

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of one numbered acceptance criterion."""
    def record(number: int, passed: bool, detail: str) -> bool:
        _CRITERIA[number] = (bool(passed), detail)
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        passed, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}")
