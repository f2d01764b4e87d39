import sys

import pytest

from focklab.fock import FockParams
from focklab.quad import build_plane_grid


@pytest.fixture(scope="session")
def grid():
    return build_plane_grid(1.0, 120)


@pytest.fixture(scope="session")
def small_grid():
    return build_plane_grid(1.0, 80)


@pytest.fixture(scope="session")
def params2():
    return FockParams(1.0, 2.0)



def pytest_terminal_summary(terminalreporter):
    mods = [m for name, m in sys.modules.items() if name.endswith("test_acceptance")]
    lines = getattr(mods[0], "RESULTS", []) if mods else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
