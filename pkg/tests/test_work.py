import numpy as np
import pytest

from qbmft.models.protocol import ForceProtocol
from qbmft.models.spectral_density import SpectralDensity
from qbmft.models.work_distribution import WorkDistribution
from qbmft.services import bath, greens, thermal, work
from qbmft.utils.error_handling import DomainError, NumericalError

from tests.conftest import DT

SMOOTHSTEP = ForceProtocol('smoothstep', 1.0, 2.0)


def test_mean_work_routes_agree(classical_setup, ramp):
    _, gs = classical_setup
    quadratic, direct = work.mean_work_routes(ramp, gs)
    assert quadratic == pytest.approx(direct, rel=1e-6)


def test_mean_work_exceeds_free_energy_change(classical_setup, ramp):
    _, gs = classical_setup
    deltaF = thermal.delta_F(ramp.f_start, ramp.f_end, gs.M, gs.Omega)
    assert work.mean_work(ramp, gs) > deltaF


def test_mean_trajectory_starts_at_equilibrium(classical_setup):
    _, gs = classical_setup
    protocol = ForceProtocol('ramp', 1.0, 2.0, f0=0.4)
    x = work.mean_trajectory(protocol, gs)
    assert x[0] == pytest.approx(0.4)


def test_classical_jarzynski_closes(classical_setup, ramp, correlation):
    kernels, gs = classical_setup
    wd = work.work_distribution(ramp, gs, kernels, corr=correlation(classical_setup, ramp))
    check = work.jarzynski_check(wd)
    assert abs(check['residual']) < 1e-10
    assert check['lhs'] == pytest.approx(check['rhs'], rel=1e-10)


def test_quantum_work_variance_violates_closure(quantum_setup):
    kernels, gs = quantum_setup
    wd = work.work_distribution(SMOOTHSTEP, gs, kernels)
    check = work.jarzynski_check(wd)
    assert check['imbalance'] > 0.0
    assert check['residual'] > 0.0


def test_variance_routes_agree(quantum_setup, correlation):
    corr = correlation(quantum_setup, SMOOTHSTEP)
    time_route = work.work_variance(SMOOTHSTEP, corr, check_routes=False)
    frequency_route = work.work_variance_frequency(SMOOTHSTEP, corr)
    assert frequency_route == pytest.approx(time_route, rel=1e-4)


def test_constant_protocol_has_no_work(classical_setup, correlation):
    kernels, gs = classical_setup
    flat = ForceProtocol('ramp', 0.0, 1.0, f0=0.7)
    wd = work.work_distribution(flat, gs, kernels, corr=correlation(classical_setup, flat))
    assert wd.meanW == 0.0
    assert wd.varW == 0.0
    assert wd.deltaF == 0.0


def test_classical_crooks_slope_is_beta(classical_setup, ramp, correlation):
    kernels, gs = classical_setup
    corr = correlation(classical_setup, ramp)
    forward = work.work_distribution(ramp, gs, kernels, 'forward', corr)
    reverse = work.work_distribution(ramp, gs, kernels, 'reverse', corr)
    assert reverse.deltaF == pytest.approx(-forward.deltaF)
    grid = np.linspace(forward.meanW - 3 * forward.std, forward.meanW + 3 * forward.std, 41)
    crooks = work.crooks_check(forward, reverse, grid)
    assert crooks['slope'] == pytest.approx(kernels.beta, rel=1e-6)
    assert crooks['prefactor'] == pytest.approx(1.0, rel=1e-8)
    assert crooks['log_ratio_at_deltaF'] == pytest.approx(0.0, abs=1e-6)
    assert np.max(np.abs(crooks['residuals'])) < 1e-5


def test_quantum_crooks_slope_is_below_beta(quantum_setup):
    kernels, gs = quantum_setup
    forward = work.work_distribution(SMOOTHSTEP, gs, kernels, 'forward')
    reverse = work.work_distribution(SMOOTHSTEP, gs, kernels, 'reverse')
    grid = np.linspace(forward.meanW - 3 * forward.std, forward.meanW + 3 * forward.std, 41)
    crooks = work.crooks_check(forward, reverse, grid)
    assert crooks['prefactor'] < 1.0
    assert crooks['slope'] == pytest.approx(crooks['predicted_slope'], rel=1e-6)


def test_crooks_rejects_mismatched_deltaF():
    forward = WorkDistribution(1.0, 0.5, 0.2, 1.0)
    reverse = WorkDistribution(1.0, 0.5, 0.3, 1.0, 'reverse')
    with pytest.raises(DomainError):
        work.crooks_check(forward, reverse, [0.0, 1.0])


def test_negative_variance_rejected():
    with pytest.raises(NumericalError):
        WorkDistribution(1.0, -0.1, 0.0, 1.0)


def test_unknown_direction(classical_setup, ramp):
    kernels, gs = classical_setup
    with pytest.raises(DomainError):
        work.work_distribution(ramp, gs, kernels, 'sideways')


def test_hightemp_series_converges_to_exact(classical_setup, pulse):
    _, gs = classical_setup
    series = work.hightemp_correction(pulse, gs, 1.0, 0.05, n_max=4)
    assert series['coefficients'][:3] == pytest.approx([1 / 3, -1 / 45, 2 / 945])
    assert series['partial_sum'] == pytest.approx(series['exact_correction'], rel=1e-4)
    assert series['terms'][0] > 0.0 > series['terms'][1]
    assert series['disagreement'] < 1e-2


def test_hightemp_exact_correction_is_quantum_excess(classical_setup, quantum_setup, pulse, correlation):
    _, gs = classical_setup
    classical = work.work_variance_frequency(pulse, correlation(classical_setup, pulse))
    quantum = work.work_variance_frequency(pulse, correlation(quantum_setup, pulse))
    series = work.hightemp_correction(pulse, gs, 1.0, 1.0, n_max=1)
    assert series['classical'] == pytest.approx(classical, rel=1e-5)
    assert series['exact_correction'] == pytest.approx(quantum - classical, rel=1e-5)


def test_hightemp_order_limits(classical_setup, pulse):
    _, gs = classical_setup
    with pytest.raises(DomainError):
        work.hightemp_correction(pulse, gs, 1.0, 0.1, n_max=11)


def test_lowtemp_expansion_within_bound(classical_setup, drude):
    _, gs = classical_setup
    omega = np.linspace(0.1, 10.0, 100)
    values, bound = work.lowtemp_sigma_ft(omega, gs, 1.0, 1.0, 50)
    exact = thermal.sigma_xx_spectrum(drude, 1.0, 1.0, 1.0, 1.0, omega)
    assert np.all(np.abs(exact - values) <= bound * (1 + 1e-6) + 1e-300)
    assert np.allclose(values[omega > 1.0], exact[omega > 1.0], rtol=1e-12)


def test_lowtemp_needs_hbar(classical_setup):
    _, gs = classical_setup
    with pytest.raises(DomainError):
        work.lowtemp_sigma_ft([1.0], gs, 1.0, 0.0, 10)


@pytest.mark.parametrize('protocol, beta, hbar, regime', [
    (ForceProtocol('smoothstep', 1.0, 2.0), 1.0, 1e-4, 'high'),
    (ForceProtocol('smoothstep', 1.0, 2.0), 1.0, 1.0, 'intermediate'),
    (ForceProtocol('sinusoid', 1.0, 2.0, cycles=5), 1e4, 1.0, 'low'),
])
def test_regime_classifier(protocol, beta, hbar, regime):
    sd = SpectralDensity.drude(0.5, 5.0)
    assert work.regime_classifier(protocol, sd, beta, hbar)['regime'] == regime


def test_regime_classifier_interpolates_the_support_edge():
    protocol = ForceProtocol('smoothstep', 1.0, 2.0)
    sd = SpectralDensity.drude(0.5, 5.0)
    report = work.regime_classifier(protocol, sd, 1.0, 1.0)
    omega, F = protocol.fdot_ft(protocol.tau / 1024)
    magnitude = np.abs(F)
    level = work.SPECTRAL_FLOOR * magnitude.max()
    last = np.nonzero(magnitude >= level)[0][-1]
    assert omega[last] <= report['omega_h'] <= omega[last + 1]
    assert np.interp(report['omega_h'], omega, magnitude) == pytest.approx(level, rel=1e-9)
    assert report['omega_l'] == 0.0


@pytest.mark.parametrize('gamma0', [0.1, 0.5])
def test_markovian_classical_fluctuation_theorems_are_exact(gamma0):
    kernels = bath.build_kernel_table(SpectralDensity.ohmic(gamma0), 2.0, 0.0, DT, 2001)
    gs = greens.solve_homogeneous(kernels, 1.0, 1.0)
    forward = work.work_distribution(SMOOTHSTEP, gs, kernels, 'forward')
    reverse = work.work_distribution(SMOOTHSTEP, gs, kernels, 'reverse')
    assert abs(work.jarzynski_check(forward)['residual']) < 1e-8
    grid = np.linspace(forward.meanW - 3 * forward.std, forward.meanW + 3 * forward.std, 41)
    crooks = work.crooks_check(forward, reverse, grid)
    assert crooks['prefactor'] == pytest.approx(1.0, rel=1e-8)
    assert crooks['slope'] == pytest.approx(2.0, rel=1e-8)


def test_hightemp_correction_scales_as_hbar_squared(classical_setup, pulse):
    _, gs = classical_setup
    hbars = np.geomspace(1e-3, 1e-1, 5)
    corrections = [work.hightemp_correction(pulse, gs, 1.0, hbar, n_max=1)['exact_correction']
                   for hbar in hbars]
    slope = np.polyfit(np.log(hbars), np.log(corrections), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.05)
