"""
Homogeneous solutions h(t), g(t) of

    M x'' + 2M int_0^t gamma(t-s) x'(s) ds + M Omega^2 x = 0

by Volterra time stepping, Laplace-domain evaluation, FFT Bromwich inversion
and the Markovian closed form.
"""

import logging

import numpy as np
from scipy.fft import next_fast_len

from qbmft.models.greens_solutions import GreensSolutions
from qbmft.models.kernel_table import KernelTable
from qbmft.models.spectral_density import BathKind, SpectralDensity
from qbmft.services import bath
from qbmft.utils.error_handling import DomainError, PoleError
from qbmft.utils.numerics import causal_convolution

logger = logging.getLogger(__name__)

STEPS_PER_SCALE = 40
CRITICAL_SWITCH = 1e-6
POLE_TOLERANCE = 1e-14


def _check_system(M, Omega):
    if not M > 0:
        raise DomainError(f"M must be positive, got {M}", module='greens')
    if not Omega > 0:
        raise DomainError(f"Omega must be positive, got {Omega}", module='greens')


def markovian_closed_form(gamma0: float, M: float, Omega: float, t):
    """
    (h, g, hdot, gdot) of M x'' + 2 M gamma0 x' + M Omega^2 x = 0 at times t >= 0.
    The critical branch is used when |gamma0 - Omega| < 1e-6 Omega.
    """
    if gamma0 < 0:
        raise DomainError(f"gamma0 must be non-negative, got {gamma0}", module='greens')
    _check_system(M, Omega)
    t = np.asarray(t, dtype=float)
    decay = np.exp(-gamma0 * t)

    if abs(gamma0 - Omega) < CRITICAL_SWITCH * Omega:
        h = decay * (1.0 + gamma0 * t)
        g = t * decay / M
        gdot = decay * (1.0 - gamma0 * t) / M
    elif gamma0 < Omega:
        w1 = np.sqrt(Omega ** 2 - gamma0 ** 2)
        c, s = np.cos(w1 * t), np.sin(w1 * t)
        h = decay * (c + gamma0 / w1 * s)
        g = decay * s / (M * w1)
        gdot = decay * (c - gamma0 / w1 * s) / M
    else:
        kappa = np.sqrt(gamma0 ** 2 - Omega ** 2)
        slow = np.exp(-(gamma0 - kappa) * t)
        fast = np.exp(-(gamma0 + kappa) * t)
        cosh, sinh = 0.5 * (slow + fast), 0.5 * (slow - fast)
        h = cosh + gamma0 / kappa * sinh
        g = sinh / (M * kappa)
        gdot = (cosh - gamma0 / kappa * sinh) / M
    hdot = -M * Omega ** 2 * g
    return h, g, hdot, gdot


def _volterra(gamma: np.ndarray, dt: float, n: int, M: float, Omega: float):
    """
    Trapezoidal stepping of x' = v, v' = -Omega^2 x - 2 int_0^t gamma(t-s) v(s) ds
    with trapezoidal product quadrature; the step is linear, so it is solved
    exactly. Columns are the h and g initial conditions.
    """
    X = np.zeros((n, 2))
    V = np.zeros((n, 2))
    A = np.zeros((n, 2))
    X[0] = (1.0, 0.0)
    V[0] = (0.0, 1.0 / M)
    A[0] = -Omega ** 2 * X[0]
    w2 = Omega ** 2
    g0 = gamma[0]
    coef = 1.0 + 0.25 * dt * dt * w2 + 0.5 * dt * dt * g0

    for k in range(n - 1):
        P = dt * (0.5 * gamma[k + 1] * V[0] + gamma[k:0:-1] @ V[1:k + 1])
        rhs = V[k] + 0.5 * dt * A[k] - dt * P - 0.5 * dt * w2 * (X[k] + 0.5 * dt * V[k])
        V[k + 1] = rhs / coef
        X[k + 1] = X[k] + 0.5 * dt * (V[k] + V[k + 1])
        A[k + 1] = -w2 * X[k + 1] - 2.0 * (P + 0.5 * dt * g0 * V[k + 1])
    return X, V


def solve_homogeneous(kernels: KernelTable, M: float, Omega: float, n: int = None,
                      richardson: bool = True) -> GreensSolutions:
    """
    Solve for h and g on the kernel table grid.

    Args:
        kernels: kernel table supplying the grid and damping kernel
        M: system mass
        Omega: physical (renormalized) frequency
        n: number of grid points (defaults to the table length)
        richardson: combine with a half-step solve for fourth-order accuracy

    Returns:
        GreensSolutions
    """
    _check_system(M, Omega)
    sd = kernels.spectral_density
    n = kernels.n if n is None else n
    dt = kernels.dt
    t = np.arange(n) * dt

    if sd.local:
        logger.info("Local Ohmic kernel: using the Markovian closed form")
        h, g, hdot, gdot = markovian_closed_form(sd.gamma0, M, Omega, t)
        return GreensSolutions(dt, h, g, hdot, gdot, M, Omega, sd, method='markovian')

    limit = min(2.0 * np.pi / Omega, 1.0 / sd.cutoff) / STEPS_PER_SCALE
    if dt > limit * (1.0 + 1e-12):
        raise DomainError(f"grid step {dt:.4g} does not resolve 1/Omega and 1/cutoff "
                          f"(need dt <= {limit:.4g})", module='greens')
    if n > kernels.n:
        raise DomainError(f"requested {n} points but kernel table has {kernels.n}", module='greens')

    logger.info(f"Volterra solve: n={n}, dt={dt:.4g}, richardson={richardson}")
    X, V = _volterra(kernels.gamma[:n], dt, n, M, Omega)
    if richardson:
        fine_t = np.arange(2 * n - 1) * (0.5 * dt)
        Xf, Vf = _volterra(bath.damping_kernel(sd, fine_t), 0.5 * dt, 2 * n - 1, M, Omega)
        X = (4.0 * Xf[::2] - X) / 3.0
        V = (4.0 * Vf[::2] - V) / 3.0
    return GreensSolutions(dt, X[:, 0], X[:, 1], V[:, 0], V[:, 1], M, Omega, sd)


def greens_laplace(sd: SpectralDensity, M: float, Omega: float, s):
    """
    (h^(s), g^(s)) = ((2 gamma^ + s), 1/M) / (s^2 + 2 s gamma^ + Omega^2), Re(s) > 0.
    A vanishing denominator raises PoleError with its location.
    """
    _check_system(M, Omega)
    gamma_hat = bath.damping_laplace(sd, s)
    s_arr = np.asarray(s)
    denominator = s_arr * s_arr + 2.0 * s_arr * gamma_hat + Omega ** 2
    scale = np.abs(s_arr) ** 2 + Omega ** 2
    bad = np.abs(denominator) <= POLE_TOLERANCE * scale
    if np.any(bad):
        raise PoleError(np.ravel(s_arr)[np.argmax(np.ravel(bad))])
    h_hat = (2.0 * gamma_hat + s_arr) / denominator
    g_hat = (1.0 / M) / denominator
    if np.ndim(h_hat) == 0:
        return h_hat.item(), g_hat.item()
    return h_hat, g_hat


def _reference_parameters(sd: SpectralDensity, Omega: float):
    """Damped-oscillator (a, Omega_ref) with the same large-s behaviour as g^."""
    if sd.kind == BathKind.OHMIC_NO_CUTOFF:
        return sd.gamma0, Omega
    gamma_zero = sd.gamma0 * sd.cutoff
    return 0.0, np.sqrt(Omega ** 2 + 2.0 * gamma_zero)


def bromwich_greens(sd: SpectralDensity, M: float, Omega: float, dt: float, n: int,
                    pad: int = 4) -> GreensSolutions:
    """
    Invert h^ and g^ along Re(s) = 4/T by FFT, T = (n-1)*dt. The transform of a
    damped oscillator with matching large-s behaviour is subtracted first and
    added back in closed form. Cross-check only.
    """
    _check_system(M, Omega)
    if not sd.has_closed_form_laplace:
        raise DomainError("Bromwich inversion needs a closed-form Laplace transform", module='greens')
    horizon = (n - 1) * dt
    eps = 4.0 / horizon
    length = next_fast_len(pad * n)
    omega = 2.0 * np.pi * np.fft.fftfreq(length, dt)
    s = eps + 1j * omega
    h_hat, g_hat = greens_laplace(sd, M, Omega, s)

    a, omega_ref = _reference_parameters(sd, Omega)
    d_ref = s * s + 2.0 * a * s + omega_ref ** 2
    t = np.arange(n) * dt
    h_ref, g_ref, _, _ = markovian_closed_form(a, M, omega_ref, t)

    growth = np.exp(eps * t) / dt
    r_h = growth * np.real(np.fft.ifft(h_hat - (s + 2.0 * a) / d_ref)[:n])
    r_g = growth * np.real(np.fft.ifft(g_hat - (1.0 / M) / d_ref)[:n])
    h = h_ref + r_h
    g = g_ref + r_g
    gdot = np.gradient(g, dt, edge_order=2)
    return GreensSolutions(dt, h, g, -M * Omega ** 2 * g, gdot, M, Omega, sd, method='bromwich')


def retarded_greens(gs: GreensSolutions):
    """
    g_ret on lags k*dt, k = -(n-1)..(n-1): zero for negative lags.

    Returns:
        (lags, values)
    """
    lags = np.arange(-(gs.n - 1), gs.n) * gs.dt
    values = np.concatenate([np.zeros(gs.n - 1), gs.g])
    return lags, values


def apply_retarded(gs: GreensSolutions, signal) -> np.ndarray:
    """Discrete causal convolution dt * sum_j g_ret(t_i - t_j) signal_j along the last axis."""
    signal = np.asarray(signal, dtype=float)
    n = signal.shape[-1]
    if n > gs.n:
        raise DomainError(f"signal of {n} points exceeds Green's table ({gs.n})", module='greens')
    length = next_fast_len(2 * n)
    kernel = np.fft.rfft(gs.g[:n], length)
    out = np.fft.irfft(np.fft.rfft(signal, length, axis=-1) * kernel, length, axis=-1)
    return gs.dt * out[..., :n]


def hg_relation_residuals(gs: GreensSolutions, kernels: KernelTable):
    """
    Sup-norm residuals of hdot + M Omega^2 g and M gdot - h + 2M int gamma g.
    """
    M, w2 = gs.M, gs.Omega ** 2
    first = np.max(np.abs(gs.hdot + M * w2 * gs.g))
    sd = kernels.spectral_density
    if sd.local:
        memory = sd.gamma0 * gs.g
    else:
        memory = causal_convolution(kernels.gamma[:gs.n], gs.g, gs.dt)
    second = np.max(np.abs(M * gs.gdot - gs.h + 2.0 * M * memory))
    return float(first), float(second)


def response_squared(sd: SpectralDensity, M: float, Omega: float, omega):
    """|g^(0+ - i omega)|^2, the squared susceptibility on the real axis."""
    omega = np.asarray(omega, dtype=float)
    boundary = bath.damping_boundary(sd, omega)
    denominator = Omega ** 2 - omega ** 2 - 2j * omega * boundary
    return 1.0 / (M * M * np.abs(denominator) ** 2)


def h_even_spectrum(sd: SpectralDensity, M: float, Omega: float, omega):
    """
    Fourier transform of h_e(t) = h(|t|): M Omega^2 (J/|omega|) |g^(-i omega)|^2.
    Integrates to h(0) = 1 over the real line.
    """
    return M * Omega ** 2 * bath.j_over_omega(sd, omega) * response_squared(sd, M, Omega, omega)
