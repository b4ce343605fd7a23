import pytest

from fiberring.constants import C_LIGHT, TWO_PI
from fiberring.cqed import AtomParams, ScalingReference
from fiberring.resonator import ResonatorParams

KAPPA0 = TWO_PI * 0.58e6
FSR = 87.5e6
LENGTH = 2.35
OMEGA0 = TWO_PI * C_LIGHT / 851e-9
GAMMA = TWO_PI * 2.6e6
G_REF = TWO_PI * 1.5e6
G_SURF = TWO_PI * 5e6
N_ATOMS = 2000


@pytest.fixture
def anchor_params():
    return ResonatorParams(KAPPA0, KAPPA0, OMEGA0, FSR, LENGTH, C_LIGHT / (FSR * LENGTH))


@pytest.fixture
def scaling_ref():
    return ScalingReference(LENGTH, KAPPA0, G_REF, FSR, 1.5)


@pytest.fixture
def atoms():
    return AtomParams(GAMMA, G_REF, N_ATOMS)


def rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a)



def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
