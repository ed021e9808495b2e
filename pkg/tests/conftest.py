import pytest

from qudit_canon.core import make_grid

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def g11():
    return make_grid(11)


@pytest.fixture(scope="session")
def g31():
    return make_grid(31)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
