import mpmath
import pytest

from sicforge.etf_search import EtfSpec, SearchOptions, polish_fiducial, search
from sicforge.heisenberg import FiducialVector
from sicforge.hpnum import workdps
from sicforge.symplectic import SymplecticMatrix


def hesse(digits=60):
    with workdps(digits):
        s = 1 / mpmath.sqrt(2)
        return FiducialVector.from_entries([0, s, -s], digits)


def bloch_qubit(digits=60):
    """cos(t/2)|0> + e^{i pi/4} sin(t/2)|1> with cos t = 1/sqrt 3, Bloch vector (1,1,1)/sqrt 3."""
    with workdps(digits + 10):
        t = mpmath.acos(1 / mpmath.sqrt(3))
        entries = [mpmath.cos(t / 2), mpmath.expjpi(mpmath.mpf(1) / 4) * mpmath.sin(t / 2)]
    return FiducialVector.from_entries(entries, digits)


@pytest.fixture(scope="session")
def real_fiducial_7():
    """d=7 fiducial from a search restricted to real vectors only (no ell input)."""
    J = (SymplecticMatrix.conjugation_flip(7),)
    res = search(EtfSpec(7, 49), SearchOptions(orbit=True, symmetry=J, seed=0, restarts=40))
    assert res.converged
    return res.best


@pytest.fixture(scope="session")
def zauner_fiducial_7():
    """d=7 fiducial fixed by diag(2^-1, 2) and complex conjugation, polished to 100 digits."""
    sym = (SymplecticMatrix.diagonal(2, 7), SymplecticMatrix.conjugation_flip(7))
    res = search(EtfSpec(7, 49), SearchOptions(orbit=True, symmetry=sym, seed=0))
    assert res.converged
    return polish_fiducial(res.best, 100, sym)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
