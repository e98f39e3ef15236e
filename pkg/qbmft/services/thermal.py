"""
Equilibrium quantities of the thermally prepared open oscillator: Matsubara
variances, the stationary position correlation and free energies.
"""

import logging

import numpy as np
from scipy import integrate
from scipy.linalg import matmul_toeplitz
from scipy.special import zeta

from qbmft.models.greens_solutions import GreensSolutions
from qbmft.models.kernel_table import KernelTable
from qbmft.models.spectral_density import BathKind, SpectralDensity
from qbmft.models.thermal_state import FreeEnergies, StationaryCorrelation, ThermalState
from qbmft.services import bath, greens
from qbmft.utils.error_handling import (DivergenceError, DomainError, GridMismatchError,
                                        NumericalError)
from qbmft.utils.numerics import quantum_excess, quantum_factor

logger = logging.getLogger(__name__)

INITIAL_CUTOFF = 64
MAX_CUTOFF = 2 ** 22
HORIZON_WARNING = 1e-6


def _check_parameters(beta, hbar, M, Omega):
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}", module='thermal')
    if hbar < 0:
        raise DomainError(f"hbar must be non-negative, got {hbar}", module='thermal')
    if not M > 0 or not Omega > 0:
        raise DomainError(f"M and Omega must be positive (M={M}, Omega={Omega})", module='thermal')


def _coupling_terms(sd: SpectralDensity, nu: np.ndarray) -> np.ndarray:
    """2 nu gamma^(nu) at positive Matsubara frequencies."""
    return 2.0 * nu * np.real(bath.damping_laplace(sd, nu))


def _coupling_limit(sd: SpectralDensity) -> float:
    """lim 2 nu gamma^(nu) = 2 gamma(0) for cutoff baths."""
    if sd.kind == BathKind.OHMIC_DRUDE:
        return 2.0 * sd.gamma0 * sd.cutoff
    return 2.0 * float(bath.damping_kernel(sd, 0.0))


class _MatsubaraSums:
    """Partial sums over r = 1..R, extended in doubling chunks."""

    def __init__(self, sd, beta, hbar, Omega):
        self.sd = sd
        self.c = hbar * beta / (2.0 * np.pi)
        self.w2 = Omega ** 2
        self.R = 0
        self.xx = 0.0
        self.pp = 0.0
        self.log = 0.0
        self.last_coupling = 0.0

    def extend(self, R):
        r = np.arange(self.R + 1, R + 1, dtype=float)
        nu = r / self.c
        q = _coupling_terms(self.sd, nu)
        denominator = self.w2 + nu * nu + q
        self.xx += float(np.sum(1.0 / denominator))
        self.pp += float(np.sum((self.w2 + q) / denominator))
        self.log -= float(np.sum(np.log1p((self.w2 + q) / (nu * nu))))
        self.last_coupling = float(q[-1])
        self.R = R

    def hurwitz(self, k):
        return self.c ** k * zeta(k, self.R + 1)


def _xx_tail(sums: _MatsubaraSums, sd: SpectralDensity):
    """Midpoint and half-width for sum_{r>R} 1/(nu^2 + A_r)."""
    s2, s4, s6 = sums.hurwitz(2), sums.hurwitz(4), sums.hurwitz(6)
    a_low = sums.w2 + sums.last_coupling
    if sd.local:
        lower = s2 - sums.w2 * s4 - 2.0 * sd.gamma0 * sums.hurwitz(3)
    else:
        lower = s2 - (sums.w2 + _coupling_limit(sd)) * s4
    upper = s2 - a_low * s4 + a_low ** 2 * s6
    return 0.5 * (upper + lower), 0.5 * abs(upper - lower)


def _pp_tail(sums: _MatsubaraSums, sd: SpectralDensity):
    """Midpoint and half-width for sum_{r>R} A_r/(nu^2 + A_r), cutoff baths."""
    s2, s4 = sums.hurwitz(2), sums.hurwitz(4)
    a_low = sums.w2 + sums.last_coupling
    a_high = sums.w2 + _coupling_limit(sd)
    lower = a_low * (s2 - a_low * s4)
    upper = a_high * s2
    return 0.5 * (upper + lower), 0.5 * abs(upper - lower)


def _log_tail(sums: _MatsubaraSums, sd: SpectralDensity):
    """Midpoint and half-width for sum_{r>R} log1p(A_r/nu^2), cutoff baths."""
    s2, s4 = sums.hurwitz(2), sums.hurwitz(4)
    a_low = sums.w2 + sums.last_coupling
    a_high = sums.w2 + _coupling_limit(sd)
    lower = a_low * s2 - 0.5 * a_high ** 2 * s4
    upper = a_high * s2
    return 0.5 * (upper + lower), 0.5 * abs(upper - lower)


def equilibrium_variances(sd: SpectralDensity, beta: float, hbar: float, M: float, Omega: float,
                          tol: float = 1e-8, include_momentum: bool = True, R: int = None) -> ThermalState:
    """
    Matsubara sums for the equal-time position and momentum variances.

    Args:
        sd: spectral density
        beta, hbar: inverse temperature and Planck constant
        M, Omega: system mass and physical frequency
        tol: relative bound on the neglected tail
        include_momentum: the momentum sum needs a cutoff bath
        R: fixed Matsubara cutoff; adaptive doubling from INITIAL_CUTOFF when None

    Returns:
        ThermalState
    """
    _check_parameters(beta, hbar, M, Omega)
    if hbar == 0.0:
        return ThermalState(beta, hbar, M, Omega, 1.0 / (beta * M * Omega ** 2), M / beta, 0)
    if include_momentum and sd.local:
        raise DivergenceError("momentum variance diverges for the cutoff-free Ohmic bath",
                              module='thermal')

    sums = _MatsubaraSums(sd, beta, hbar, Omega)
    fixed = R is not None
    R = int(R) if fixed else INITIAL_CUTOFF
    while True:
        sums.extend(R)
        xx_tail, xx_err = _xx_tail(sums, sd)
        sigma_xx = (1.0 / (M * beta)) * (1.0 / Omega ** 2 + 2.0 * (sums.xx + xx_tail))
        bound_xx = 2.0 * xx_err / (M * beta)
        converged = bound_xx < tol * sigma_xx
        sigma_pp, bound_pp = np.nan, 0.0
        if include_momentum:
            pp_tail, pp_err = _pp_tail(sums, sd)
            sigma_pp = (M / beta) * (1.0 + 2.0 * (sums.pp + pp_tail))
            bound_pp = 2.0 * M * pp_err / beta
            converged = converged and bound_pp < tol * sigma_pp
        if converged or fixed:
            break
        if R >= MAX_CUTOFF:
            raise NumericalError(f"Matsubara sums not converged at R={R} "
                                 f"(bounds {bound_xx:.2e}, {bound_pp:.2e})", module='thermal')
        R *= 2

    logger.debug(f"Matsubara cutoff R={R}: sigma_xx0={sigma_xx:.10g}, sigma_pp0={sigma_pp:.10g}")
    return ThermalState(beta, hbar, M, Omega, sigma_xx, float(sigma_pp), R, bound_xx, bound_pp)


def delta_F(f0: float, ftau: float, M: float, Omega: float) -> float:
    """-(f(tau)^2 - f(0)^2)/(2 M Omega^2)."""
    if Omega == 0:
        raise DomainError("Omega must be non-zero", module='thermal')
    return -(ftau ** 2 - f0 ** 2) / (2.0 * M * Omega ** 2)


def dressed_free_energy(sd: SpectralDensity, beta: float, hbar: float, M: float, Omega: float,
                        R: int = None, tol: float = 1e-10):
    """
    F_T - F_B = -(1/beta) log[(1/(beta hbar Omega)) prod_{r>=1} nu_r^2/(Omega^2 + nu_r^2 + 2 nu_r gamma^(nu_r))].

    Args:
        R: fixed Matsubara cutoff; adaptive when None
        tol: absolute tail bound target (adaptive mode)

    Returns:
        (F_offset, tail_bound, R)
    """
    _check_parameters(beta, hbar, M, Omega)
    if hbar == 0.0:
        raise DomainError("the dressed free energy needs hbar > 0 (phase-space unit)", module='thermal')
    if sd.local:
        raise DivergenceError("the Matsubara product diverges without a bath cutoff", module='thermal')

    sums = _MatsubaraSums(sd, beta, hbar, Omega)
    if R is not None:
        sums.extend(int(R))
        tail, err = _log_tail(sums, sd)
    else:
        R = INITIAL_CUTOFF
        while True:
            sums.extend(R)
            tail, err = _log_tail(sums, sd)
            if err / beta < tol or R >= MAX_CUTOFF:
                break
            R *= 2
    log_product = -np.log(beta * hbar * Omega) + sums.log - tail
    return float(-log_product / beta), float(err / beta), sums.R


def free_energies(f0: float, ftau: float, sd: SpectralDensity, beta: float, hbar: float,
                  M: float, Omega: float, R: int = None) -> FreeEnergies:
    offset, bound = np.nan, 0.0
    if hbar > 0 and not sd.local:
        offset, bound, _ = dressed_free_energy(sd, beta, hbar, M, Omega, R=R)
    return FreeEnergies(delta_F(f0, ftau, M, Omega), float(offset), bound)


def sigma_xx_spectrum(sd: SpectralDensity, beta: float, hbar: float, M: float, Omega: float, omega):
    """Two-sided sigma~_xx(omega) = hbar omega coth(beta hbar omega/2) h~_e(omega)/(2 M Omega^2)."""
    return (0.5 * quantum_factor(omega, beta, hbar) * bath.j_over_omega(sd, omega)
            * greens.response_squared(sd, M, Omega, omega))


def _frequency_integral(integrand, top, lags, epsrel=1e-10):
    """int_0^inf integrand(omega) cos(omega t) over [0, top], plus the tail bound."""
    lags = np.atleast_1d(np.asarray(lags, dtype=float))

    def vector(w):
        return integrand(w) * np.cos(w * lags)

    head, _ = integrate.quad_vec(vector, 0.0, top, epsabs=1e-14, epsrel=epsrel, limit=20000)
    tail, _ = integrate.quad(lambda w: abs(float(integrand(w))), top, np.inf, limit=500)
    return head, tail


def sigma_xx_frequency(sd: SpectralDensity, beta: float, hbar: float, M: float, Omega: float,
                       lags=0.0):
    """
    sigma_xx(t) = int_0^inf (J/omega) hbar omega coth(beta hbar omega/2) |g^(-i omega)|^2 cos(omega t).

    Returns:
        (values, tail_bound)
    """
    _check_parameters(beta, hbar, M, Omega)
    if sd.local and hbar > 0:
        raise DivergenceError("quantum correlations need a cutoff bath", module='thermal')

    def integrand(w):
        return (bath.j_over_omega(sd, w) * quantum_factor(w, beta, hbar)
                * greens.response_squared(sd, M, Omega, w))

    top = bath.frequency_scale(sd, beta, hbar, Omega)
    values, tail = _frequency_integral(integrand, top, lags)
    return (values if np.ndim(lags) else float(values[0])), float(tail)


def _quantum_correction(sd, beta, hbar, M, Omega, lags):
    def integrand(w):
        return (bath.j_over_omega(sd, w) * quantum_excess(w, beta, hbar)
                * greens.response_squared(sd, M, Omega, w))

    top = bath.frequency_scale(sd, beta, hbar, Omega)
    return _frequency_integral(integrand, top, lags)


def stationary_sigma_xx(gs: GreensSolutions, kernels: KernelTable, tau_lag):
    """
    Stationary sigma_xx(tau): h(|tau|)/(beta M Omega^2) plus the quantum
    correction from the FDR route. Lags beyond the Green's horizon log an
    accuracy warning with the truncation estimate.
    """
    beta, hbar = kernels.beta, kernels.hbar
    sd = kernels.spectral_density
    _check_parameters(beta, hbar, gs.M, gs.Omega)
    lags = np.abs(np.atleast_1d(np.asarray(tau_lag, dtype=float)))
    classical_scale = 1.0 / (beta * gs.M * gs.Omega ** 2)

    truncation = abs(gs.h[-1]) * classical_scale
    if np.any(lags > gs.horizon):
        logger.warning(f"Lag beyond Green's horizon {gs.horizon:.4g}; "
                       f"estimated truncation error {truncation:.2e}")
    elif truncation > HORIZON_WARNING * classical_scale:
        logger.warning(f"Green's horizon {gs.horizon:.4g} short of the correlation time; "
                       f"|h(T)| = {abs(gs.h[-1]):.2e}")
    values = np.interp(lags, gs.times, gs.h, right=0.0) * classical_scale
    if hbar > 0:
        correction, _ = _quantum_correction(sd, beta, hbar, gs.M, gs.Omega, lags)
        values = values + correction
    return values if np.ndim(tau_lag) else float(values[0])


def stationary_correlation(gs: GreensSolutions, kernels: KernelTable, n_lags: int) -> StationaryCorrelation:
    """sigma_xx on lags k*dt (k < n_lags) with its spectrum, for work variances."""
    if n_lags > gs.n:
        raise GridMismatchError(f"{n_lags} lags requested but Green's table has {gs.n}", module='thermal')
    sd, beta, hbar = kernels.spectral_density, kernels.beta, kernels.hbar
    M, Omega = gs.M, gs.Omega
    values = stationary_sigma_xx(gs, kernels, np.arange(n_lags) * gs.dt)

    def spectrum(omega):
        return sigma_xx_spectrum(sd, beta, hbar, M, Omega, omega)

    truncation = abs(gs.h[-1]) / (beta * M * Omega ** 2)
    return StationaryCorrelation(gs.dt, np.asarray(values), spectrum, truncation, gs.n)


def sigma_xx_two_time(gs: GreensSolutions, kernels: KernelTable, t1: float, t2: float,
                      start: float = None) -> float:
    """
    dt^2 sum g_ret(t1 - s) <xi(s) xi(s')> g_ret(t2 - s') over s, s' >= start,
    using the tabulated band-limited force covariance.
    """
    dt = gs.dt
    if not np.isclose(kernels.dt, dt, rtol=1e-12):
        raise GridMismatchError("kernel table and Green's table use different steps", module='thermal')
    start = -gs.horizon if start is None else start
    top = max(t1, t2)
    n = int(round((top - start) / dt)) + 1
    if n > kernels.n:
        raise GridMismatchError(f"covariance table too short for a {n}-point window", module='thermal')
    s = start + np.arange(n) * dt

    def column(t):
        k = np.rint((t - s) / dt).astype(int)
        inside = (k >= 0) & (k < gs.n)
        return np.where(inside, gs.g[np.clip(k, 0, gs.n - 1)], 0.0)

    a, b = column(t1), column(t2)
    return float(dt * dt * np.dot(a, matmul_toeplitz(kernels.nu[:n], b)))


def relaxation_variance(gs: GreensSolutions, kernels: KernelTable, x_var: float, p_var: float,
                        times) -> np.ndarray:
    """
    Var X(t) after an uncorrelated product-state preparation at t=0 with
    system variances (x_var, p_var): x_var (M g'(t))^2 + p_var g(t)^2 plus the
    bath-noise contribution accumulated over [0, t].
    """
    dt = gs.dt
    out = []
    for t in np.atleast_1d(times):
        k = int(round(t / dt))
        if k >= gs.n or k >= kernels.n:
            raise GridMismatchError(f"time {t} beyond tabulated horizon", module='thermal')
        a = gs.g[k::-1]
        noise = dt * dt * np.dot(a, matmul_toeplitz(kernels.nu[:k + 1], a)) if k > 0 else 0.0
        out.append(x_var * (gs.M * gs.gdot[k]) ** 2 + p_var * gs.g[k] ** 2 + noise)
    return np.array(out)
