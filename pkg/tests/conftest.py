import pytest

from qbmft.models.protocol import ForceProtocol
from qbmft.models.spectral_density import SpectralDensity
from qbmft.services import bath, greens, thermal

DT = 0.005
HORIZON = 30.0
N_POINTS = int(round(HORIZON / DT)) + 1


@pytest.fixture(scope='session')
def drude():
    return SpectralDensity.drude(0.5, 5.0)


def _setup(sd, beta, hbar):
    kernels = bath.build_kernel_table(sd, beta, hbar, DT, N_POINTS)
    gs = greens.solve_homogeneous(kernels, 1.0, 1.0)
    return kernels, gs


@pytest.fixture(scope='session')
def classical_setup(drude):
    """Kernel table and Green's functions for a classical Drude bath at beta=1."""
    return _setup(drude, 1.0, 0.0)


@pytest.fixture(scope='session')
def quantum_setup(drude):
    return _setup(drude, 1.0, 1.0)


@pytest.fixture(scope='session')
def ramp():
    return ForceProtocol('ramp', 1.0, 2.0)


@pytest.fixture(scope='session')
def pulse():
    return ForceProtocol('gaussian', 1.0, 2.0, width=0.08)


@pytest.fixture
def correlation():
    def build(setup, protocol):
        kernels, gs = setup
        return thermal.stationary_correlation(gs, kernels, protocol.grid(gs.dt).size)
    return build
