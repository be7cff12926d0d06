import pytest
from hypothesis import settings

from arithlab.sieve import build_factor_table

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

TABLE_MAX = 2 * 10**6

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def table():
    return build_factor_table(TABLE_MAX)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
