"""
Analytic work statistics of the linearly driven open oscillator: the
Gaussian work law, both fluctuation-theorem checks and the high and low
temperature expansions of the work variance.
"""

import logging

import numpy as np

from qbmft.models.greens_solutions import GreensSolutions
from qbmft.models.kernel_table import KernelTable
from qbmft.models.protocol import ForceProtocol
from qbmft.models.spectral_density import SpectralDensity
from qbmft.models.thermal_state import StationaryCorrelation
from qbmft.models.work_distribution import WorkDistribution
from qbmft.services import greens, thermal
from qbmft.utils.error_handling import DomainError, GridMismatchError, NumericalError
from qbmft.utils.numerics import (causal_convolution, coth_series_coefficient, quantum_excess,
                                  simpson_weights, toeplitz_quadratic_form)

logger = logging.getLogger(__name__)

MEAN_ROUTE_TOLERANCE = 1e-8
VARIANCE_ROUTE_TOLERANCE = 1e-5
CROOKS_VARIANCE_TOLERANCE = 1e-5
MAX_SERIES_ORDER = 10
SPECTRAL_FLOOR = 1e-3
HIGH_TEMPERATURE = 0.1
LOW_TEMPERATURE = 10.0


def _support(protocol: ForceProtocol, dt: float, available: int, what: str) -> np.ndarray:
    t = protocol.grid(dt)
    if t.size > available:
        raise GridMismatchError(f"protocol needs {t.size} points but the {what} has {available}",
                                module='work')
    return t


def mean_trajectory(protocol: ForceProtocol, gs: GreensSolutions) -> np.ndarray:
    """
    <x(t)> on the protocol grid for a state equilibrated at f(0):
    f(0) h(t)/(M Omega^2) + int_0^t g(t-s) f(s) ds.
    """
    t = _support(protocol, gs.dt, gs.n, "Green's table")
    n = t.size
    f = protocol.value(t)
    static = f[0] * gs.h[:n] / (gs.M * gs.Omega ** 2)
    return static + causal_convolution(gs.g[:n], f, gs.dt)


def mean_work_routes(protocol: ForceProtocol, gs: GreensSolutions):
    """
    Mean work by both routes.

    Returns:
        (quadratic, direct): deltaF + fdot.h_e.fdot/(2 M Omega^2) and
        -int fdot <x> dt
    """
    t = _support(protocol, gs.dt, gs.n, "Green's table")
    n = t.size
    fdot = protocol.derivative(t)
    M, w2 = gs.M, gs.Omega ** 2
    deltaF = thermal.delta_F(protocol.f_start, protocol.f_end, M, gs.Omega)
    quadratic = deltaF + toeplitz_quadratic_form(fdot, gs.h, fdot, gs.dt) / (2.0 * M * w2)
    direct = -float(np.dot(simpson_weights(n, gs.dt), fdot * mean_trajectory(protocol, gs)))
    return quadratic, direct


def mean_work(protocol: ForceProtocol, gs: GreensSolutions) -> float:
    quadratic, direct = mean_work_routes(protocol, gs)
    scale = max(abs(quadratic), protocol.amplitude ** 2 / (2.0 * gs.M * gs.Omega ** 2))
    if abs(quadratic - direct) > MEAN_ROUTE_TOLERANCE * scale:
        logger.warning(f"Mean-work routes disagree: {quadratic:.12g} vs {direct:.12g}")
    return quadratic


def _check_correlation(corr: StationaryCorrelation, dt: float):
    if not np.isclose(corr.dt, dt, rtol=1e-12):
        raise GridMismatchError(f"correlation step {corr.dt} differs from protocol step {dt}",
                                module='work')


def work_variance_frequency(protocol: ForceProtocol, corr: StationaryCorrelation) -> float:
    """
    (2 pi)^2 int |f~_d(omega)|^2 sigma~_xx(omega) d omega on the padded FFT grid.
    The padding covers the Green's memory so the periodized correlation does
    not wrap onto the support.
    """
    t = _support(protocol, corr.dt, corr.n, "correlation table")
    memory = max(corr.n, corr.memory_points)
    omega, F = protocol.fdot_ft(corr.dt, padded_length=t.size + 2 * memory)
    d_omega = omega[1] - omega[0]
    weights = np.full(omega.size, 2.0 * d_omega)
    weights[0] = d_omega
    return float((2.0 * np.pi) ** 2 * np.sum(weights * np.abs(F) ** 2 * corr.spectrum(omega)))


def work_variance(protocol: ForceProtocol, corr: StationaryCorrelation,
                  check_routes: bool = True) -> float:
    """
    sigma_W^2 = fdot.sigma_xx.fdot over the protocol support.

    Args:
        protocol: force protocol
        corr: stationary correlation on the protocol step, covering lags up to tau
        check_routes: also evaluate the frequency route and warn on disagreement

    Returns:
        Work variance (time-domain value)
    """
    t = _support(protocol, corr.dt, corr.n, "correlation table")
    fdot = protocol.derivative(t)
    variance = toeplitz_quadratic_form(fdot, corr.values, fdot, corr.dt)
    scale = float(np.dot(simpson_weights(t.size, corr.dt), np.abs(fdot))) ** 2 * abs(corr.values[0])
    if variance < -1e-10 * scale:
        raise NumericalError(f"work variance quadratic form is negative ({variance:.3e}); "
                             f"check the grid and Green's horizon", module='work')
    variance = max(variance, 0.0)

    if check_routes and variance > 0.0:
        frequency = work_variance_frequency(protocol, corr)
        gap = abs(frequency - variance) / variance
        if gap > VARIANCE_ROUTE_TOLERANCE:
            logger.warning(f"Work-variance routes disagree by {gap:.2e} "
                           f"(time {variance:.10g}, frequency {frequency:.10g})")
        else:
            logger.debug(f"Work-variance routes agree to {gap:.2e}")
    return variance


def work_distribution(protocol: ForceProtocol, gs: GreensSolutions, kernels: KernelTable,
                      direction: str = 'forward', corr: StationaryCorrelation = None) -> WorkDistribution:
    """
    Gaussian work law for the forward protocol or its time reverse f(tau - t).
    The reverse law is computed from the reversed protocol, not from identities.
    """
    if direction == 'reverse':
        protocol = protocol.reversed()
    elif direction != 'forward':
        raise DomainError(f"unknown direction '{direction}'", module='work')
    n = protocol.grid(gs.dt).size
    if corr is None:
        corr = thermal.stationary_correlation(gs, kernels, n)
    _check_correlation(corr, gs.dt)
    meanW = mean_work(protocol, gs)
    varW = work_variance(protocol, corr)
    deltaF = thermal.delta_F(protocol.f_start, protocol.f_end, gs.M, gs.Omega)
    logger.info(f"{direction} work: <W>={meanW:.8g}, var={varW:.8g}, deltaF={deltaF:.8g}")
    return WorkDistribution(meanW, varW, deltaF, kernels.beta, direction)


def jarzynski_check(wd: WorkDistribution) -> dict:
    """<exp(-beta W)> of the Gaussian law against exp(-beta deltaF)."""
    beta = wd.beta
    lhs = float(np.exp(-beta * (wd.meanW - 0.5 * beta * wd.varW)))
    rhs = float(np.exp(-beta * wd.deltaF))
    return {
        'lhs': lhs,
        'rhs': rhs,
        'residual': float(np.expm1(beta * wd.closure_imbalance)),
        'imbalance': wd.closure_imbalance,
    }


def crooks_check(wd_forward: WorkDistribution, wd_reverse: WorkDistribution, W_grid) -> dict:
    """
    log P_F(W) - log P_R(-W) on W_grid, its least-squares slope and the
    slope predicted by beta (<W> - deltaF)/(beta varW/2).
    """
    beta = wd_forward.beta
    if not np.isclose(wd_reverse.beta, beta, rtol=1e-12):
        raise DomainError("forward and reverse distributions use different beta", module='work')
    if not np.isclose(wd_reverse.deltaF, -wd_forward.deltaF, rtol=1e-9, atol=1e-14):
        raise DomainError("reverse deltaF is not the negative of the forward one", module='work')
    if wd_forward.varW <= 0.0:
        raise DomainError("degenerate work distribution (zero variance)", module='work')
    mismatch = abs(wd_reverse.varW - wd_forward.varW) / wd_forward.varW
    if mismatch > CROOKS_VARIANCE_TOLERANCE:
        raise NumericalError(f"forward and reverse work variances differ by {mismatch:.2e}",
                             module='work')

    W = np.asarray(W_grid, dtype=float)
    log_ratio = wd_forward.log_pdf(W) - wd_reverse.log_pdf(-W)
    slope, intercept = np.polyfit(W, log_ratio, 1)
    prefactor = wd_forward.dissipated / (0.5 * beta * wd_forward.varW)
    return {
        'slope': float(slope),
        'intercept': float(intercept),
        'ideal_slope': beta,
        'prefactor': float(prefactor),
        'predicted_slope': float(beta * prefactor),
        'log_ratio_at_deltaF': float(wd_forward.log_pdf(wd_forward.deltaF)
                                     - wd_reverse.log_pdf(-wd_forward.deltaF)),
        'variance_mismatch': float(mismatch),
        'residuals': log_ratio - beta * (W - wd_forward.deltaF),
    }


def hightemp_correction(protocol: ForceProtocol, gs: GreensSolutions, beta: float, hbar: float,
                        n_max: int = 3) -> dict:
    """
    Terms of sigma_W^2 - fdot.h_e.fdot/(beta M Omega^2) in powers of (beta hbar)^2.

    The n-th term is c_n (beta hbar/2)^(2n) (2 pi)^2 int |f~_d|^2 omega^(2n) h~_e d omega
    / (beta M Omega^2) with c_n = 2^(2n) B_2n/(2n)!. Each term is also
    evaluated in time as f^(n+1).h_e.f^(n+1) and the largest relative
    disagreement is reported.

    Returns:
        dict with terms, time_terms, partial_sum, exact_correction, classical
    """
    if n_max < 1 or n_max > MAX_SERIES_ORDER:
        raise DomainError(f"n_max must be in 1..{MAX_SERIES_ORDER}, got {n_max}", module='work')
    sd = gs.spectral_density
    if sd is None:
        raise DomainError("Green's table carries no spectral density", module='work')
    M, Omega, dt = gs.M, gs.Omega, gs.dt
    t = _support(protocol, dt, gs.n, "Green's table")
    omega, F = protocol.fdot_ft(dt, padded_length=t.size + 2 * gs.n)
    d_omega = omega[1] - omega[0]
    weights = np.full(omega.size, 2.0 * d_omega)
    weights[0] = d_omega
    density = (2.0 * np.pi) ** 2 * weights * np.abs(F) ** 2 * greens.h_even_spectrum(sd, M, Omega, omega)
    scale = 1.0 / (beta * M * Omega ** 2)

    classical = scale * float(np.sum(density))
    terms, time_terms = [], []
    x = 0.5 * beta * hbar
    for n in range(1, n_max + 1):
        coefficient = float(coth_series_coefficient(n)) * x ** (2 * n) * scale
        terms.append(coefficient * float(np.sum(density * omega ** (2 * n))))
        deriv = protocol.derivative(t, n + 1)
        time_terms.append(coefficient * toeplitz_quadratic_form(deriv, gs.h, deriv, dt))

    exact = 0.5 * beta * scale * float(np.sum(density * quantum_excess(omega, beta, hbar)))

    gaps = [abs(a - b) / max(abs(a), 1e-300) for a, b in zip(terms, time_terms) if a != 0.0]
    disagreement = max(gaps) if gaps else 0.0
    if disagreement > 1e-3:
        logger.warning(f"High-temperature series: frequency and derivative forms differ by {disagreement:.2e}")
    return {
        'terms': terms,
        'time_terms': time_terms,
        'coefficients': [float(coth_series_coefficient(n)) for n in range(1, n_max + 1)],
        'partial_sum': float(np.sum(terms)),
        'exact_correction': exact,
        'classical': classical,
        'disagreement': disagreement,
    }


def lowtemp_sigma_ft(omega_grid, gs: GreensSolutions, beta: float, hbar: float, k_max: int):
    """
    Low-temperature form (hbar/(2 M Omega^2)) |omega| h~_e(omega) [1 + 2 sum_k exp(-k beta hbar |omega|)].

    Returns:
        (values, truncation_bound)
    """
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}", module='work')
    if not hbar > 0:
        raise DomainError("the low-temperature expansion needs hbar > 0", module='work')
    sd = gs.spectral_density
    if sd is None:
        raise DomainError("Green's table carries no spectral density", module='work')
    M, Omega = gs.M, gs.Omega
    w = np.abs(np.asarray(omega_grid, dtype=float))
    x = beta * hbar * w
    k = np.arange(1, k_max + 1)
    series = 1.0 + 2.0 * np.sum(np.exp(-np.multiply.outer(x, k)), axis=-1)
    prefactor = hbar * greens.h_even_spectrum(sd, M, Omega, w) / (2.0 * M * Omega ** 2)
    values = prefactor * w * series

    # |omega| / (1 - exp(-x)) -> 1/(beta hbar) at omega = 0
    safe = np.where(x > 0, x, 1.0)
    ratio = np.where(x > 0, w / -np.expm1(-safe), 1.0 / (beta * hbar))
    bound = prefactor * 2.0 * np.exp(-(k_max + 1) * x) * ratio
    return values, bound


def _crossing(omega, magnitude, level, inside: int, outside: int) -> float:
    """Frequency where |F| passes through level between bins inside and outside."""
    if outside < 0 or outside >= omega.size:
        return float(omega[inside])
    a, b = magnitude[inside], magnitude[outside]
    weight = (a - level) / (a - b) if a != b else 0.0
    return float(omega[inside] + weight * (omega[outside] - omega[inside]))


def regime_classifier(protocol: ForceProtocol, sd: SpectralDensity, beta: float, hbar: float,
                      points: int = 1024) -> dict:
    """
    Classify a protocol as high, low or intermediate temperature from the
    support of |f~_d|: omega_h is where it last falls through 1e-3 of its
    maximum, omega_l where it first rises through it. Both crossings are
    interpolated linearly between neighbouring bins.
    """
    scale = sd.cutoff if sd.cutoff is not None else sd.gamma0
    points = max(points, int(np.ceil(20.0 * protocol.tau * (scale or 0.0))))
    omega, F = protocol.fdot_ft(protocol.tau / points)
    magnitude = np.abs(F)
    level = SPECTRAL_FLOOR * magnitude.max()
    above = np.nonzero(magnitude >= level)[0]
    if above.size == 0:
        omega_h = omega_l = 0.0
    else:
        omega_h = _crossing(omega, magnitude, level, above[-1], above[-1] + 1)
        omega_l = _crossing(omega, magnitude, level, above[0], above[0] - 1)

    high, low = beta * hbar * omega_h, beta * hbar * omega_l
    if high < HIGH_TEMPERATURE:
        regime = 'high'
    elif low > LOW_TEMPERATURE:
        regime = 'low'
    else:
        regime = 'intermediate'
    return {'regime': regime, 'omega_h': omega_h, 'omega_l': omega_l,
            'beta_hbar_omega_h': high, 'beta_hbar_omega_l': low}
