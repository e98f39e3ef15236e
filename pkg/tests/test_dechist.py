from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbmft.models.history_pair import HistoryPair
from qbmft.models.protocol import ForceProtocol
from qbmft.models.spectral_density import SpectralDensity
from qbmft.services import bath, dechist, work
from qbmft.utils.error_handling import DomainError, GridMismatchError

SMOOTHSTEP = ForceProtocol('smoothstep', 1.0, 2.0)


@lru_cache(maxsize=1)
def _small_table():
    return bath.build_kernel_table(SpectralDensity.drude(0.5, 5.0), 1.0, 1.0, 0.005, 512)


def _pair(n, dt, sigma, scale=1.0):
    t = np.arange(n) * dt
    return HistoryPair(np.sin(t), scale * np.cos(3.0 * t), sigma, dt)


def test_history_pair_from_histories():
    hp = HistoryPair.from_histories([0.0, 1.0, 2.0], [1.0, 1.0, 4.0], 0.5, 0.1)
    assert np.allclose(hp.U, [0.5, 1.0, 3.0])
    assert np.allclose(hp.u, [1.0, 0.0, 2.0])
    assert np.allclose(hp.sigma, 0.5)
    with pytest.raises(DomainError):
        HistoryPair([0.0, 1.0], [0.0], 0.5, 0.1)
    with pytest.raises(DomainError):
        HistoryPair([0.0, 1.0], [0.0, 1.0], 0.0, 0.1)


def test_single_point_offdiag_exponent(classical_setup):
    kernels, _ = classical_setup
    dt, u, sigma = kernels.dt, 0.7, 0.3
    hp = HistoryPair([0.0], [u], sigma, dt)
    result = dechist.decoherence_exponent(hp, kernels, 1.0, 1.0, LU=[0.0])
    nu0 = kernels.nu[0]
    expected = -0.5 * dt * dt * u * u * nu0 / (1.0 + 2.0 * sigma ** 2 * dt * nu0)
    assert result['offdiag_exponent'] == pytest.approx(expected, rel=1e-10)
    assert result['diag_exponent'] == 0.0


def test_small_sigma_recovers_noise_functional(quantum_setup):
    kernels, _ = quantum_setup
    n, dt = 201, kernels.dt
    hp = _pair(n, dt, 3e-3)
    result = dechist.decoherence_exponent(hp, kernels, 1.0, 1.0, LU=np.zeros(n))
    K = kernels.nu[np.abs(np.subtract.outer(np.arange(n), np.arange(n)))]
    expected = -0.5 * dt * dt * hp.u @ K @ hp.u
    assert result['offdiag_exponent'] == pytest.approx(expected, rel=1e-3)


@given(st.floats(min_value=0.05, max_value=5.0), st.floats(min_value=1.1, max_value=4.0))
@settings(max_examples=10, deadline=None)
def test_offdiag_scales_quadratically_and_relaxes_with_sigma(sigma, factor):
    kernels = _small_table()
    n = 101
    base = dechist.decoherence_exponent(_pair(n, kernels.dt, sigma), kernels, 1.0, 1.0, LU=np.zeros(n))
    scaled = dechist.decoherence_exponent(_pair(n, kernels.dt, sigma, factor), kernels, 1.0, 1.0,
                                          LU=np.zeros(n))
    wider = dechist.decoherence_exponent(_pair(n, kernels.dt, factor * sigma), kernels, 1.0, 1.0,
                                         LU=np.zeros(n))
    assert base['offdiag_exponent'] <= 0.0
    assert scaled['offdiag_exponent'] == pytest.approx(factor ** 2 * base['offdiag_exponent'], rel=1e-8)
    assert wider['offdiag_exponent'] >= base['offdiag_exponent'] * (1 + 1e-12)


def test_diag_exponent_grows_with_sigma(quantum_setup):
    kernels, _ = quantum_setup
    n = 101
    LU = np.linspace(0.0, 1.0, n)
    narrow = dechist.decoherence_exponent(_pair(n, kernels.dt, 0.1), kernels, 1.0, 1.0, LU=LU)
    wide = dechist.decoherence_exponent(_pair(n, kernels.dt, 1.0), kernels, 1.0, 1.0, LU=LU)
    assert wide['diag_exponent'] < narrow['diag_exponent'] <= 0.0


def test_langevin_operator_annihilates_homogeneous_solution(quantum_setup):
    kernels, gs = quantum_setup
    LU = dechist.langevin_operator(gs.h[:401], kernels, gs.M, gs.Omega)
    assert np.max(np.abs(LU[3:-3])) < 1e-3


def test_mean_history_is_classical_path(quantum_setup):
    kernels, gs = quantum_setup
    t = SMOOTHSTEP.grid(gs.dt)
    U = work.mean_trajectory(SMOOTHSTEP, gs)
    hp = HistoryPair(U, np.zeros(t.size), 0.5, gs.dt)
    driven = dechist.decoherence_exponent(hp, kernels, gs.M, gs.Omega, force=SMOOTHSTEP.value(t))
    free = dechist.decoherence_exponent(hp, kernels, gs.M, gs.Omega)
    assert abs(driven['diag_exponent']) < 1e-3 * abs(free['diag_exponent'])
    assert driven['offdiag_exponent'] == 0.0


def test_grid_limits(quantum_setup):
    kernels, _ = quantum_setup
    n = dechist.MAX_GRID + 1
    with pytest.raises(DomainError):
        dechist.decoherence_exponent(_pair(n, kernels.dt, 1.0), kernels, 1.0, 1.0, LU=np.zeros(n))
    with pytest.raises(GridMismatchError):
        dechist.decoherence_exponent(_pair(11, 2 * kernels.dt, 1.0), kernels, 1.0, 1.0, LU=np.zeros(11))


def test_resolvability_flags(quantum_setup):
    kernels, _ = quantum_setup
    report = dechist.resolvability_report(kernels, 1.0, 1.0)
    nu0 = report['nu0']
    assert nu0 > 0.0
    assert report['min_separation'] == pytest.approx(np.sqrt(1.0 / nu0 + 2.0))
    recommended = report['recommended_sigma']
    assert dechist.resolvability_report(kernels, 1.01 * recommended, 1.0)['flag'] == 'trajectories-valid'
    assert dechist.resolvability_report(kernels, 0.5 * recommended, 1.0)['flag'] == 'marginal'
    assert dechist.resolvability_report(kernels, 0.1 * recommended, 1.0)['flag'] == 'quantum-dominated'
    with pytest.raises(DomainError):
        dechist.resolvability_report(kernels, 0.0, 1.0)


@given(st.lists(st.floats(min_value=-5.0, max_value=5.0), min_size=1, max_size=50),
       st.floats(min_value=0.2, max_value=2.0))
def test_windows_partition_unity(x, sigma):
    result = dechist.window_partition_sum(x, sigma)
    assert result['total'] == pytest.approx(1.0, abs=1e-6)
    assert result['weights'].size == result['centres'].size


def test_minimum_separation_shrinks_with_temperature(drude):
    separations = []
    for beta in (4.0, 2.0, 1.0, 0.5, 0.25):
        kernels = bath.build_kernel_table(drude, beta, 1.0, 0.005, 64)
        separations.append(dechist.resolvability_report(kernels, 0.2, 1.0)['min_separation'])
    assert np.all(np.diff(separations) < 0.0)


def test_histories_five_separations_apart_are_suppressed(classical_setup):
    kernels, _ = classical_setup
    sigma = dechist.resolvability_report(kernels, 1.0, 1.0)['recommended_sigma']
    u_star = dechist.resolvability_report(kernels, sigma, 1.0)['min_separation']
    n = int(round(2.0 * np.pi / kernels.dt)) + 1
    hp = HistoryPair(np.zeros(n), np.full(n, 5.0 * u_star), sigma, kernels.dt)
    result = dechist.decoherence_exponent(hp, kernels, 1.0, 1.0, LU=np.zeros(n))
    assert result['offdiag_exponent'] <= -10.0
