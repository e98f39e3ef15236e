from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbmft.models.spectral_density import BathKind, SpectralDensity
from qbmft.services import bath
from qbmft.utils.error_handling import DivergenceError, DomainError, LocalKernelError


def test_spectral_density_validation():
    with pytest.raises(DomainError):
        SpectralDensity.drude(0.5, -1.0)
    with pytest.raises(DomainError):
        SpectralDensity(BathKind.OHMIC_NO_CUTOFF, 0.5, cutoff=3.0)
    with pytest.raises(DomainError):
        SpectralDensity.power_law(0.5, 3.0, 2.5)
    with pytest.raises(DomainError):
        SpectralDensity.drude(0.0, 3.0)


def test_spectral_density_values(drude):
    assert bath.spectral_density(drude, 0.0) == 0.0
    w = 2.0
    expected = 2.0 * 0.5 / np.pi * w * 25.0 / (w * w + 25.0)
    assert bath.spectral_density(drude, w) == pytest.approx(expected)
    with pytest.raises(DomainError):
        bath.spectral_density(drude, -1.0)


def test_ohmic_spectral_density_is_linear():
    sd = SpectralDensity.ohmic(0.3)
    w = np.array([0.5, 1.0, 4.0])
    assert np.allclose(bath.spectral_density(sd, w), 2.0 * 0.3 / np.pi * w)


def test_local_kernel_has_no_pointwise_value():
    with pytest.raises(LocalKernelError):
        bath.damping_kernel(SpectralDensity.ohmic(0.3), 1.0)


@pytest.mark.parametrize('t', [0.0, 0.1, 0.7])
def test_drude_kernel_matches_quadrature(drude, t):
    assert bath.damping_kernel(drude, t) == pytest.approx(bath.damping_kernel_quadrature(drude, t), rel=1e-7)


def test_damping_laplace_drude(drude):
    s = 1.5 + 2.0j
    assert bath.damping_laplace(drude, s) == pytest.approx(0.5 * 5.0 / (s + 5.0))
    with pytest.raises(DomainError):
        bath.damping_laplace(drude, -1.0)


def test_power_law_reduces_to_drude_at_unit_exponent():
    sd = SpectralDensity.power_law(0.4, 3.0, 1.0)
    reference = SpectralDensity.drude(0.4, 3.0)
    assert bath.damping_laplace(sd, 2.0) == pytest.approx(bath.damping_laplace(reference, 2.0), rel=1e-7)
    assert bath.damping_kernel(sd, 0.5) == pytest.approx(bath.damping_kernel(reference, 0.5), rel=1e-6)


def test_damping_boundary_real_part_is_spectral(drude):
    w = np.array([0.5, 2.0, 8.0])
    boundary = bath.damping_boundary(drude, w)
    assert np.allclose(boundary.real, np.pi * bath.spectral_density(drude, w) / (2.0 * w))


def test_classical_noise_kernel_is_scaled_damping(drude):
    beta = 2.0
    assert bath.noise_kernel(drude, beta, 0.0, 0.3) == pytest.approx(
        2.0 / beta * bath.damping_kernel(drude, 0.3))


def test_quantum_drude_noise_diverges_at_zero_lag(drude):
    with pytest.raises(DivergenceError):
        bath.noise_kernel(drude, 1.0, 1.0, 0.0)
    assert np.isfinite(bath.noise_kernel(drude, 1.0, 1.0, 0.2))


@given(st.floats(min_value=0.2, max_value=5.0), st.floats(min_value=0.0, max_value=2.0))
@settings(max_examples=10, deadline=None)
def test_kernel_table_satisfies_fdr(beta, hbar):
    sd = SpectralDensity.drude(0.5, 5.0)
    table = bath.build_kernel_table(sd, beta, hbar, 0.01, 256)
    assert table.fdr_violation <= bath.FDR_TOLERANCE
    assert np.all(table.nu_ft >= 0.0)
    assert table.embedding_length == 512


def test_kernel_table_covariance_matches_quadrature_away_from_origin(drude):
    dt, n = 0.005, 4096
    table = bath.build_kernel_table(drude, 1.0, 1.0, dt, n)
    k = 100
    assert table.nu[k] == pytest.approx(bath.noise_kernel(drude, 1.0, 1.0, k * dt), rel=2e-3)


def test_classical_kernel_table_is_band_limited_damping(drude):
    table = bath.build_kernel_table(drude, 2.0, 0.0, 0.005, 4096)
    t = table.times[:200]
    assert np.allclose(table.nu[:200], bath.damping_kernel(drude, t), rtol=5e-3, atol=1e-3)


def test_quantum_table_rejects_local_bath():
    with pytest.raises(DivergenceError):
        bath.build_kernel_table(SpectralDensity.ohmic(0.5), 1.0, 1.0, 0.01, 64)


def test_noise_strength_classical_limit(drude):
    period = 2.0 * np.pi
    beta = 1.0
    # int_0^T (2M/beta) gamma0 cutoff exp(-cutoff t) dt
    expected = 2.0 / beta * 0.5 * (1.0 - np.exp(-5.0 * period))
    assert bath.noise_strength(drude, beta, 0.0, period) == pytest.approx(expected, rel=1e-6)


def test_noise_strength_grows_with_hbar(drude):
    period = 2.0 * np.pi
    assert bath.noise_strength(drude, 1.0, 1.0, period) > bath.noise_strength(drude, 1.0, 0.0, period)


@pytest.mark.parametrize('exponent', [0.3, 1.0, 1.5])
def test_power_law_vanishes_at_zero_frequency(exponent):
    sd = SpectralDensity.power_law(0.5, 5.0, exponent)
    assert bath.spectral_density(sd, 0.0) == 0.0
    values = bath.spectral_density(sd, np.array([0.0, 0.5, 2.0]))
    assert values[0] == 0.0
    assert np.all(np.isfinite(values))
    assert np.all(values[1:] > 0.0)


def test_fdr_check_detects_a_perturbed_covariance(drude):
    table = bath.build_kernel_table(drude, 1.0, 0.5, 0.01, 256)
    assert bath.fdr_violation(table) <= bath.FDR_TOLERANCE
    row = np.array(table.covariance_row)
    row[3] *= 1.0 + 1e-6
    row[-3] = row[3]
    tampered = replace(table, covariance_row=row)
    assert bath.fdr_violation(tampered) > 1e-9


def test_fdr_check_skips_the_divergent_sub_ohmic_bin():
    sd = SpectralDensity.power_law(0.5, 5.0, 0.5)
    table = bath.build_kernel_table(sd, 1.0, 0.0, 0.01, 256)
    assert table.nu_ft[0] == 0.0
    assert table.fdr_violation <= bath.FDR_TOLERANCE


def test_noise_kernel_approaches_classical_limit_as_hbar_squared(drude):
    classical = bath.build_kernel_table(drude, 1.0, 0.0, 0.1, 256).nu
    hbars = np.array([1e-3, 2e-3, 4e-3, 8e-3])
    gaps = [np.max(np.abs(bath.build_kernel_table(drude, 1.0, hbar, 0.1, 256).nu - classical))
            for hbar in hbars]
    slope = np.polyfit(np.log(hbars), np.log(gaps), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.1)
