"""
Spectral densities, damping and noise kernels, their Laplace and Fourier
transforms, and the kernel tables consumed by the other services.

Conventions: gamma(t) = (1/M) int_0^inf (J/omega) cos(omega t) d omega,
x~(omega) = (1/2pi) int x(t) exp(i omega t) dt, and the force covariance
<xi(t) xi(0)> = hbar*nu(t) = int_0^inf (J/omega) hbar omega coth(beta hbar omega/2) cos(omega t).
"""

import logging
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from qbmft.models.kernel_table import KernelTable
from qbmft.models.spectral_density import BathKind, SpectralDensity
from qbmft.utils.error_handling import (DivergenceError, DomainError, LocalKernelError,
                                        NumericalError)
from qbmft.utils.numerics import quantum_factor

logger = logging.getLogger(__name__)

QUAD_EPSREL = 1e-10
QUAD_EPSABS = 1e-14
FDR_TOLERANCE = 1e-10
NEGATIVE_SPECTRUM_FLOOR = -1e-12


def _check_frequency(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("spectral density requires omega >= 0", module='bath')
    return omega


def spectral_density(sd: SpectralDensity, omega):
    """J(omega) for omega >= 0; J(0) = 0."""
    omega = _check_frequency(omega)
    with np.errstate(invalid='ignore'):
        value = omega * j_over_omega(sd, omega)
    return np.where(omega == 0.0, 0.0, value)[()]


def j_over_omega(sd: SpectralDensity, omega):
    """
    J(omega)/omega with its omega -> 0 limit (infinite for sub-Ohmic PowerLaw).
    """
    omega = np.abs(np.asarray(omega, dtype=float))
    prefactor = 2.0 * sd.M * sd.gamma0 / np.pi
    if sd.kind == BathKind.OHMIC_NO_CUTOFF:
        return np.full_like(omega, prefactor)
    lorentz = sd.cutoff ** 2 / (omega ** 2 + sd.cutoff ** 2)
    if sd.kind == BathKind.OHMIC_DRUDE:
        return prefactor * lorentz
    with np.errstate(divide='ignore'):
        return prefactor * (omega / sd.cutoff) ** (sd.exponent - 1.0) * lorentz


def frequency_scale(sd: SpectralDensity, beta: float, hbar: float, Omega: float = 0.0) -> float:
    """Upper quadrature frequency 50*max(cutoff, Omega, 1/(beta*hbar))."""
    scales = [Omega, sd.gamma0]
    if sd.cutoff is not None:
        scales.append(sd.cutoff)
    if hbar > 0:
        scales.append(1.0 / (beta * hbar))
    return 50.0 * max(scales)


def damping_kernel_quadrature(sd: SpectralDensity, t: float) -> float:
    """gamma(t) by adaptive Fourier quadrature of (1/M) J/omega."""
    if sd.local:
        raise LocalKernelError()
    t = abs(float(t))

    def integrand(w):
        return float(j_over_omega(sd, w)) / sd.M

    if t == 0.0:
        value, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=QUAD_EPSABS,
                                  epsrel=QUAD_EPSREL, limit=500)
    else:
        value, _ = integrate.quad(integrand, 0.0, np.inf, weight='cos', wvar=t,
                                  epsabs=QUAD_EPSABS, limlst=200, limit=500)
    return value


def damping_kernel(sd: SpectralDensity, t):
    """
    Damping kernel gamma(|t|). Drude uses gamma0*cutoff*exp(-cutoff|t|);
    PowerLaw is evaluated by quadrature; the local Ohmic kernel has no
    pointwise value.
    """
    if sd.local:
        raise LocalKernelError()
    t = np.abs(np.asarray(t, dtype=float))
    if sd.kind == BathKind.OHMIC_DRUDE:
        return sd.gamma0 * sd.cutoff * np.exp(-sd.cutoff * t)
    values = np.array([damping_kernel_quadrature(sd, tk) for tk in t.ravel()])
    return values.reshape(t.shape) if t.ndim else float(values[0])


def noise_kernel(sd: SpectralDensity, beta: float, hbar: float, t) -> float:
    """
    Force covariance hbar*nu(|t|) by quadrature. hbar=0 gives the classical
    (2M/beta)*gamma(t).
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}", module='bath')
    if hbar < 0:
        raise DomainError(f"hbar must be non-negative, got {hbar}", module='bath')
    t = abs(float(t))
    if hbar == 0.0:
        return 2.0 * sd.M / beta * float(damping_kernel(sd, t))
    if sd.local:
        raise DivergenceError("quantum noise kernel of the cutoff-free Ohmic bath is not integrable",
                              module='bath')

    def integrand(w):
        return float(j_over_omega(sd, w) * quantum_factor(w, beta, hbar))

    if t == 0.0:
        # J*coth ~ omega^(s-2) at large omega
        exponent = 1.0 if sd.kind == BathKind.OHMIC_DRUDE else sd.exponent
        if exponent >= 1.0:
            raise DivergenceError("equal-time quantum noise kernel diverges logarithmically or worse "
                                  "for this cutoff; evaluate at t > 0", module='bath',
                                  details={'t': 0.0, 'kind': sd.kind.value})
        value, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=QUAD_EPSABS,
                                  epsrel=QUAD_EPSREL, limit=500)
        return value
    value, _ = integrate.quad(integrand, 0.0, np.inf, weight='cos', wvar=t,
                              epsabs=QUAD_EPSABS, limlst=200, limit=500)
    return value


def damping_laplace(sd: SpectralDensity, s):
    """Laplace transform of the damping kernel for Re(s) > 0."""
    s = np.asarray(s)
    s = s.astype(complex) if np.iscomplexobj(s) else s.astype(float)
    if np.any(np.real(s) <= 0):
        raise DomainError("damping_laplace requires Re(s) > 0", module='bath')
    if sd.kind == BathKind.OHMIC_NO_CUTOFF:
        result = np.full(s.shape, sd.gamma0, dtype=s.dtype)
    elif sd.kind == BathKind.OHMIC_DRUDE:
        result = sd.gamma0 * sd.cutoff / (s + sd.cutoff)
    else:
        result = np.array([_power_law_laplace(sd, sk) for sk in s.ravel()],
                          dtype=s.dtype).reshape(s.shape)
    return result if result.ndim else result.item()


def _power_law_laplace(sd: SpectralDensity, s: complex):
    def part(fn):
        def integrand(w):
            return float(j_over_omega(sd, w)) / sd.M * fn(s / (s * s + w * w))
        value, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=QUAD_EPSABS,
                                  epsrel=QUAD_EPSREL, limit=500)
        return value

    real = part(np.real)
    if s.imag == 0.0:
        return real
    return complex(real, part(np.imag))


def damping_boundary(sd: SpectralDensity, omega):
    """
    Boundary value gamma^(0+ - i omega) = int_0^inf gamma(t) exp(i omega t) dt.
    Real part is pi*J/(2 M omega); the imaginary part is closed form for
    Drude and a tabulated principal-value integral for PowerLaw.
    """
    omega = np.asarray(omega, dtype=float)
    if sd.kind == BathKind.OHMIC_NO_CUTOFF:
        return np.full(omega.shape, sd.gamma0, dtype=complex)
    if sd.kind == BathKind.OHMIC_DRUDE:
        return sd.gamma0 * sd.cutoff / (sd.cutoff - 1j * omega)
    a = np.abs(omega)
    real = np.pi * j_over_omega(sd, a) / (2.0 * sd.M)
    grid, values = _power_law_imaginary_table(sd)
    spline = CubicSpline(np.log(grid), values)
    inside = np.clip(a, grid[0], grid[-1])
    imag = spline(np.log(inside))
    # linear below the table, 1/omega above it
    imag = np.where(a < grid[0], values[0] * a / grid[0], imag)
    imag = np.where(a > grid[-1], values[-1] * grid[-1] / np.maximum(a, grid[-1]), imag)
    return real + 1j * np.sign(omega) * imag


def _principal_value_imaginary(sd: SpectralDensity, w: float) -> float:
    # (1/M) PV int (J/x)/x * w x ... written as f(x)/(x - w)
    def f(x):
        return -float(j_over_omega(sd, x)) * w / (sd.M * (w + x))

    low, _ = integrate.quad(lambda x: f(x) / (x - w), 0.0, 0.5 * w, limit=500)
    mid, _ = integrate.quad(f, 0.5 * w, 1.5 * w, weight='cauchy', wvar=w, limit=500)
    high, _ = integrate.quad(lambda x: f(x) / (x - w), 1.5 * w, np.inf, limit=500)
    return low + mid + high


@lru_cache(maxsize=32)
def _power_law_imaginary_table(sd: SpectralDensity):
    logger.info(f"Tabulating PowerLaw boundary transform for {sd}")
    grid = sd.cutoff * np.logspace(-4, 4, 321)
    values = np.array([_principal_value_imaginary(sd, w) for w in grid])
    if not np.all(np.isfinite(values)):
        raise NumericalError("PowerLaw boundary transform is not finite", module='bath')
    return grid, values


def noise_spectrum(sd: SpectralDensity, beta: float, hbar: float, omega):
    """Two-sided force-covariance spectrum hbar*nu~(omega) = (J/omega) q(omega)/2."""
    return 0.5 * j_over_omega(sd, omega) * quantum_factor(omega, beta, hbar)


def build_kernel_table(sd: SpectralDensity, beta: float, hbar: float, dt: float, n: int) -> KernelTable:
    """
    Tabulate gamma and the band-limited noise covariance on t_k = k*dt,
    k = 0..n-1, with spectra on the length-2n circulant embedding grid.

    Args:
        sd: spectral density
        beta: inverse temperature
        hbar: Planck constant (0 selects the classical limit)
        dt: grid step
        n: number of lags

    Returns:
        KernelTable with the FDR check stored on it
    """
    if not beta > 0 or hbar < 0:
        raise DomainError(f"invalid temperature/hbar (beta={beta}, hbar={hbar})", module='bath')
    if not dt > 0 or n < 2:
        raise DomainError(f"invalid grid (dt={dt}, n={n})", module='bath')
    if sd.local and hbar > 0:
        raise DivergenceError("hbar > 0 requires a cutoff bath (quantum noise is UV divergent)",
                              module='bath')

    length = 2 * n
    omega = 2.0 * np.pi * np.fft.rfftfreq(length, dt)
    d_omega = 2.0 * np.pi / (length * dt)
    with np.errstate(divide='ignore', invalid='ignore'):
        gamma_ft = j_over_omega(sd, omega) / (2.0 * sd.M)
        nu_ft = noise_spectrum(sd, beta, hbar, omega)
    if not np.isfinite(gamma_ft[0]):
        logger.warning("Sub-Ohmic spectrum diverges at omega=0; dropping the DC bin")
        gamma_ft[0] = 0.0
        nu_ft[0] = 0.0

    if np.min(nu_ft) < NEGATIVE_SPECTRUM_FLOOR * np.max(nu_ft):
        raise NumericalError("negative noise spectrum on grid", module='bath')

    row = length * d_omega * np.fft.irfft(nu_ft, n=length)
    nu = row[:n]
    if sd.local:
        gamma = length * d_omega * np.fft.irfft(gamma_ft, n=length)[:n]
    else:
        gamma = damping_kernel(sd, np.arange(n) * dt)

    table = KernelTable(sd, beta, hbar, dt, gamma, nu, omega, gamma_ft, nu_ft, length, row)
    violation = fdr_violation(table)
    if violation > FDR_TOLERANCE:
        raise NumericalError(f"FDR violated on frequency grid ({violation:.3e})", module='bath')
    object.__setattr__(table, 'fdr_violation', violation)
    logger.debug(f"Kernel table n={n}, dt={dt:.4g}, FDR violation {violation:.2e}")
    return table


def _fdr_target(sd: SpectralDensity, omega, beta: float, hbar: float) -> np.ndarray:
    """hbar*nu~(omega) = (hbar/2) J coth(beta hbar omega/2), J/(beta omega) at hbar=0."""
    omega = np.asarray(omega, dtype=float)
    J = spectral_density(sd, omega)
    with np.errstate(divide='ignore', invalid='ignore'):
        if hbar > 0:
            target = 0.5 * hbar * J / np.tanh(0.5 * beta * hbar * omega)
        else:
            target = J / (beta * omega)
        target = np.where(omega == 0.0, j_over_omega(sd, 0.0) / beta, target)
    return target


def fdr_violation(table: KernelTable) -> float:
    """
    Relative deviation of the spectrum of the tabulated covariance row from
    (hbar/2) J coth(beta hbar omega/2), over the frequency grid. Bins where
    the target is infinite (sub-Ohmic DC) are skipped.
    """
    d_omega = 2.0 * np.pi / (table.embedding_length * table.dt)
    spectrum = np.fft.rfft(table.covariance_row).real / (table.embedding_length * d_omega)
    target = _fdr_target(table.spectral_density, table.omega, table.beta, table.hbar)
    finite = np.isfinite(target)
    scale = np.max(np.abs(target[finite])) if np.any(finite) else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(spectrum[finite] - target[finite])) / scale)


def noise_strength(sd: SpectralDensity, beta: float, hbar: float, period: float) -> float:
    """
    nu_0 = int_0^period hbar*nu(t) dt, the noise strength accumulated over one
    system period.
    """
    if not period > 0:
        raise DomainError("period must be positive", module='bath')
    if sd.local and hbar > 0:
        raise DivergenceError("quantum noise of the cutoff-free Ohmic bath is UV divergent",
                              module='bath')

    def smooth(w):
        return float(j_over_omega(sd, w) * quantum_factor(w, beta, hbar))

    top = frequency_scale(sd, beta, hbar, 2.0 * np.pi / period)
    head, _ = integrate.quad(lambda w: smooth(w) * period * np.sinc(w * period / np.pi),
                             0.0, top, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=2000)
    tail, _ = integrate.quad(lambda w: smooth(w) / w, top, np.inf, weight='sin', wvar=period,
                             limlst=200, limit=500)
    return head + tail
