import numpy as np
import pytest

from qbmft.models.protocol import ForceProtocol
from qbmft.utils.error_handling import DomainError, GridMismatchError


@pytest.mark.parametrize('kind', ['ramp', 'smoothstep', 'sinusoid', 'gaussian'])
def test_derivative_matches_finite_difference(kind):
    protocol = ForceProtocol(kind, 1.3, 2.0, f0=0.2)
    t = np.linspace(0.2, 1.8, 9)
    h = 1e-6
    numeric = (protocol.value(t + h) - protocol.value(t - h)) / (2 * h)
    assert np.allclose(protocol.derivative(t), numeric, atol=1e-5)


def test_endpoints():
    protocol = ForceProtocol('smoothstep', 2.0, 3.0, f0=0.5)
    assert protocol.f_start == pytest.approx(0.5)
    assert protocol.f_end == pytest.approx(2.5)
    assert protocol.value(10.0) == pytest.approx(2.5)
    assert protocol.derivative(-1.0) == 0.0


def test_reversed_protocol():
    protocol = ForceProtocol('ramp', 1.0, 2.0)
    reverse = protocol.reversed()
    t = np.linspace(0.0, 2.0, 5)
    assert np.allclose(reverse.value(t), protocol.value(2.0 - t))
    assert np.allclose(reverse.derivative(t), -protocol.derivative(2.0 - t))
    assert reverse.reversed() == protocol


def test_gaussian_second_derivative_sign():
    protocol = ForceProtocol('gaussian', 1.0, 2.0, width=0.1)
    assert protocol.derivative(1.0, 2) == pytest.approx(-1.0 / 0.2 ** 2)


def test_tabulated_protocol():
    t = np.linspace(0.0, 1.0, 11)
    protocol = ForceProtocol.from_samples(t, t ** 2)
    assert protocol.tau == 1.0
    assert protocol.f_end == pytest.approx(1.0)
    assert protocol.derivative(0.5) == pytest.approx(1.0, rel=1e-6)


def test_grid_requires_multiple_of_step():
    protocol = ForceProtocol('ramp', 1.0, 1.0)
    assert protocol.grid(0.25).size == 5
    with pytest.raises(GridMismatchError):
        protocol.grid(0.3)


def test_invalid_shape():
    with pytest.raises(DomainError):
        ForceProtocol('square', 1.0, 1.0)


def test_fdot_ft_at_zero_frequency_is_total_change():
    protocol = ForceProtocol('smoothstep', 1.5, 2.0)
    omega, values = protocol.fdot_ft(0.01)
    assert omega[0] == 0.0
    assert values[0].real == pytest.approx(1.5 / (2.0 * np.pi), rel=1e-4)
    assert values.size >= 8 * 201 // 2
