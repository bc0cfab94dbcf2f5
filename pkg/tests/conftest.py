import pytest

from eedesign.params import TABLE1_HARDWARE, TABLE1_PROPAGATION
from eedesign.scenario import default_scenario

ACCEPTANCE_LINES: list = []


@pytest.fixture
def p():
    return TABLE1_PROPAGATION


@pytest.fixture
def h():
    return TABLE1_HARDWARE


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for the end-of-run acceptance summary."""

    def record(number: int, title: str, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] AC{number:<2d} {title}: {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
