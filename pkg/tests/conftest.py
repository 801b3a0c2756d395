from pathlib import Path

import pytest

from mddlog import textio

DATA = Path(__file__).parent / "data"


def load(name: str) -> str:
    return (DATA / name).read_text(encoding="utf-8")


@pytest.fixture
def split_pair():
    return (textio.parse_program(load("split_left.mddlog")),
            textio.parse_program(load("split_right.mddlog")))


@pytest.fixture
def three_col():
    return textio.parse_mmsnp(load("three_col.mmsnp"))


@pytest.fixture
def four_col():
    return textio.parse_mmsnp(load("four_col.mmsnp"))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
