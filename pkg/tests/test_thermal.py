import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbmft.models.spectral_density import SpectralDensity
from qbmft.services import thermal
from qbmft.utils.error_handling import DivergenceError, DomainError


def test_classical_variances(drude):
    state = thermal.equilibrium_variances(drude, 2.0, 0.0, 1.5, 0.8)
    assert state.sigma_xx0 == pytest.approx(1.0 / (2.0 * 1.5 * 0.64))
    assert state.sigma_pp0 == pytest.approx(1.5 / 2.0)
    assert state.matsubara_cutoff == 0


def test_weak_coupling_limit_is_bare_oscillator():
    sd = SpectralDensity.drude(1e-3, 5.0)
    beta, hbar, Omega = 1.0, 1.0, 1.0
    state = thermal.equilibrium_variances(sd, beta, hbar, 1.0, Omega)
    bare = hbar / (2.0 * Omega) / np.tanh(0.5 * beta * hbar * Omega)
    assert state.sigma_xx0 == pytest.approx(bare, rel=1e-2)
    assert state.sigma_pp0 == pytest.approx(bare * Omega ** 2, rel=1e-2)


def test_quantum_variance_exceeds_classical(drude):
    state = thermal.equilibrium_variances(drude, 1.0, 1.0, 1.0, 1.0)
    assert state.sigma_xx0 > state.classical_sigma_xx
    assert state.sigma_pp0 > state.classical_sigma_pp
    assert state.tail_bound_xx < 1e-8 * state.sigma_xx0


def test_high_temperature_approaches_classical(drude):
    state = thermal.equilibrium_variances(drude, 0.01, 1.0, 1.0, 1.0)
    assert state.sigma_xx0 == pytest.approx(state.classical_sigma_xx, rel=1e-3)


def test_local_bath_momentum_diverges():
    sd = SpectralDensity.ohmic(0.5)
    with pytest.raises(DivergenceError):
        thermal.equilibrium_variances(sd, 1.0, 1.0, 1.0, 1.0)
    state = thermal.equilibrium_variances(sd, 1.0, 1.0, 1.0, 1.0, include_momentum=False)
    assert np.isnan(state.sigma_pp0)
    assert state.sigma_xx0 > 1.0


def test_invalid_parameters(drude):
    with pytest.raises(DomainError):
        thermal.equilibrium_variances(drude, -1.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        thermal.equilibrium_variances(drude, 1.0, -1.0, 1.0, 1.0)


def test_matsubara_agrees_with_frequency_integral(drude):
    state = thermal.equilibrium_variances(drude, 1.0, 1.0, 1.0, 1.0)
    value, tail = thermal.sigma_xx_frequency(drude, 1.0, 1.0, 1.0, 1.0, 0.0)
    assert value == pytest.approx(state.sigma_xx0, rel=1e-5)
    assert tail < 1e-4 * value


def test_delta_F():
    assert thermal.delta_F(0.0, 1.0, 1.0, 1.0) == pytest.approx(-0.5)
    assert thermal.delta_F(1.0, 0.0, 2.0, 1.0) == pytest.approx(0.25)
    assert thermal.delta_F(0.3, 0.3, 1.0, 1.0) == 0.0


def test_dressed_free_energy_weak_coupling():
    sd = SpectralDensity.drude(1e-3, 5.0)
    beta, hbar, Omega = 2.0, 1.0, 1.0
    offset, bound, R = thermal.dressed_free_energy(sd, beta, hbar, 1.0, Omega)
    bare = np.log(2.0 * np.sinh(0.5 * beta * hbar * Omega)) / beta
    assert offset == pytest.approx(bare, rel=1e-2)
    assert bound < 1e-8
    assert R >= thermal.INITIAL_CUTOFF


def test_dressed_free_energy_requires_quantum(drude):
    with pytest.raises(DomainError):
        thermal.dressed_free_energy(drude, 1.0, 0.0, 1.0, 1.0)


def test_free_energies_classical_has_no_offset(drude):
    free = thermal.free_energies(0.0, 1.0, drude, 1.0, 0.0, 1.0, 1.0)
    assert free.deltaF == pytest.approx(-0.5)
    assert np.isnan(free.F_offset)


def test_stationary_correlation_starts_at_equilibrium(quantum_setup, drude):
    kernels, gs = quantum_setup
    corr = thermal.stationary_correlation(gs, kernels, 401)
    state = thermal.equilibrium_variances(drude, 1.0, 1.0, 1.0, 1.0)
    assert corr.n == 401
    assert corr.values[0] == pytest.approx(state.sigma_xx0, rel=1e-5)


def test_classical_stationary_correlation_is_scaled_h(classical_setup):
    kernels, gs = classical_setup
    lags = np.array([0.0, 0.5, 1.25])
    values = thermal.stationary_sigma_xx(gs, kernels, lags)
    index = np.rint(lags / gs.dt).astype(int)
    assert np.allclose(values, gs.h[index])


def test_two_time_covariance_matches_stationary(classical_setup):
    kernels, gs = classical_setup
    value = thermal.sigma_xx_two_time(gs, kernels, 0.5, 0.0, start=-25.0)
    assert value == pytest.approx(thermal.stationary_sigma_xx(gs, kernels, 0.5), rel=2e-3)


def test_relaxation_reaches_stationary_variance(classical_setup):
    kernels, gs = classical_setup
    early, late = thermal.relaxation_variance(gs, kernels, 0.0, 0.0, [0.0, 25.0])
    assert early == 0.0
    assert late == pytest.approx(1.0, rel=2e-3)


@given(st.floats(-5.0, 5.0), st.floats(-5.0, 5.0), st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_delta_F_is_antisymmetric(f0, ftau, M, Omega):
    assert thermal.delta_F(f0, ftau, M, Omega) == -thermal.delta_F(ftau, f0, M, Omega)


def test_fixed_matsubara_cutoff_stays_within_its_tail_bound(drude):
    adaptive = thermal.equilibrium_variances(drude, 1.0, 1.0, 1.0, 1.0)
    fixed = thermal.equilibrium_variances(drude, 1.0, 1.0, 1.0, 1.0, R=8)
    assert fixed.matsubara_cutoff == 8
    assert fixed.tail_bound_xx > adaptive.tail_bound_xx
    gap = abs(fixed.sigma_xx0 - adaptive.sigma_xx0)
    assert gap <= fixed.tail_bound_xx + adaptive.tail_bound_xx + 1e-12


def test_coupling_correction_is_linear_in_gamma0():
    bare = 0.5 / np.tanh(0.5)
    couplings = np.array([1e-3, 2e-3, 4e-3, 8e-3])
    deviations = [abs(thermal.equilibrium_variances(SpectralDensity.drude(g, 5.0), 1.0, 1.0, 1.0, 1.0,
                                                    include_momentum=False).sigma_xx0 - bare)
                  for g in couplings]
    slope = np.polyfit(np.log(couplings), np.log(deviations), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.05)


@pytest.mark.slow
@pytest.mark.parametrize('hbar', [0.1, 1.0, 10.0])
@pytest.mark.parametrize('gamma0', [0.1, 0.5, 1.0])
def test_matsubara_and_frequency_routes_agree_across_regimes(hbar, gamma0):
    sd = SpectralDensity.drude(gamma0, 5.0)
    state = thermal.equilibrium_variances(sd, 1.0, hbar, 1.0, 1.0, include_momentum=False)
    value, _ = thermal.sigma_xx_frequency(sd, 1.0, hbar, 1.0, 1.0, 0.0)
    assert value == pytest.approx(state.sigma_xx0, rel=1e-4)
