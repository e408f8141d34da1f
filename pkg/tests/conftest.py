"""Collects one pass/fail line per acceptance criterion and prints them at the end of the run."""

import pytest

_LINES: list[str] = []


@pytest.fixture
def acceptance(capsys):
    def record(criterion: int, ok: bool, detail: str) -> None:
        line = f"ACCEPTANCE criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
        _LINES.append(line)
        with capsys.disabled():
            print("\n" + line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES):
            terminalreporter.write_line(line)
