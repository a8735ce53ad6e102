import numpy as np
import pytest

from icosa.group import icosahedral_group, special_orbits


@pytest.fixture(scope="session")
def group():
    return icosahedral_group()


@pytest.fixture(scope="session")
def orbits():
    return special_orbits()


@pytest.fixture(scope="session")
def maps():
    from icosa.search import special_maps
    return special_maps()


@pytest.fixture(scope="session")
def g(maps):
    return maps[0]


@pytest.fixture(scope="session")
def h(maps):
    return maps[1]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
