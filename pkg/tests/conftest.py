import numpy as np
import pytest

from heinslab import fixtures
from heinslab.domains import DomainSpec
from heinslab.expr import HolomorphicMap


def hmap(*components, params=()):
    """Map in z1..zn (and optional parameters) from component strings."""
    return HolomorphicMap.from_strings(components, param_vars=params)


def family(name):
    return fixtures.family_from_definition(fixtures.definition(fixtures.FAMILIES[name]))


def family_y0(name):
    return [complex(*p) for p in fixtures.FAMILIES[name]["y0"]]


@pytest.fixture
def disk():
    return DomainSpec.unit_disk()


@pytest.fixture
def bidisk():
    return DomainSpec.unit_polydisk(2)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20261016))


# One verdict line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
