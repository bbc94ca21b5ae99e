"""Shared fixtures for the test suite."""

import sys
from pathlib import Path

import pytest

from qals.problems.npp import NppInstance

LOOPBACK = Path(__file__).with_name("loopback_bridge.py")


@pytest.fixture
def reference_numbers() -> NppInstance:
    """The worked eight-number partitioning example."""
    return NppInstance((8, 21, 6, 7, 16, 9, 10, 27))


@pytest.fixture
def loopback_command():
    """Command line for the in-repo bridge child process."""
    def build(*flags: str) -> list[str]:
        return [sys.executable, str(LOOPBACK), *flags]

    return build


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance-criteria outcome lines after any run that had them."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "OUTCOME_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
