import numpy as np
import pytest

from spinlab import build_clifford_rep, build_dirac
from spinlab.torus import ANTIPERIODIC, PERIODIC, TorusLattice


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_dirac(n=2, size=16, spin=PERIODIC, length=2 * np.pi):
    lat = TorusLattice.uniform(n, size, length, spin)
    return build_dirac(lat, build_clifford_rep(n))


@pytest.fixture
def dirac_ap():
    return make_dirac(2, 32, ANTIPERIODIC)


@pytest.fixture
def dirac_p():
    return make_dirac(2, 16, PERIODIC)


CRITERIA = {}


def record(number, description, passed, detail=""):
    CRITERIA[number] = (description, passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        description, passed, detail = CRITERIA[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}: {description}  {detail}".rstrip())
