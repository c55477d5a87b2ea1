import pytest

from ragalab.datasets import pilu_events
from ragalab.notedetect import default_notedb


@pytest.fixture(scope="session")
def db():
    return default_notedb()


@pytest.fixture(scope="session")
def pilu():
    return pilu_events()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
