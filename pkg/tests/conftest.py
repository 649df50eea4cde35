from pathlib import Path

import pytest

from realsyn.parser import load_sketch

DATA = Path(__file__).parents[1] / "src" / "realsyn" / "data"


@pytest.fixture
def bundled():
    return lambda name: load_sketch(DATA / f"{name}.sk")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
