"""Small numerical helpers shared by the services."""

from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import matmul_toeplitz

_SERIES_SWITCH = 1e-2


def x_coth_x(x):
    """x*coth(x), even, equal to 1 at x=0."""
    x = np.abs(np.asarray(x, dtype=float))
    small = x < _SERIES_SWITCH
    xs = np.where(small, 1.0, x)
    x2 = x * x
    series = 1.0 + x2 / 3.0 - x2 * x2 / 45.0
    return np.where(small, series, xs / np.tanh(xs))


def quantum_factor(omega, beta, hbar):
    """
    hbar*|omega|*coth(beta*hbar*|omega|/2), the factor relating the noise and
    damping spectra. Reduces to 2/beta at hbar=0 or omega=0.
    """
    x = 0.5 * beta * hbar * np.abs(np.asarray(omega, dtype=float))
    return (2.0 / beta) * x_coth_x(x)


def quantum_excess(omega, beta, hbar):
    """quantum_factor minus its classical value 2/beta, without cancellation."""
    x = 0.5 * beta * hbar * np.abs(np.asarray(omega, dtype=float))
    small = x < _SERIES_SWITCH
    xs = np.where(small, 1.0, x)
    x2 = x * x
    series = x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 ** 3 / 945.0
    return (2.0 / beta) * np.where(small, series, xs / np.tanh(xs) - 1.0)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Exact Bernoulli number B_n (B_1 = +1/2 convention; only even n are used)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    return a[0]


def coth_series_coefficient(n: int) -> Fraction:
    """Coefficient of x^(2n) in x*coth(x): 2^(2n) B_2n / (2n)!."""
    factorial = 1
    for k in range(2, 2 * n + 1):
        factorial *= k
    return Fraction(2 ** (2 * n)) * bernoulli(2 * n) / factorial


def simpson_weights(n: int, dt: float) -> np.ndarray:
    """
    Composite fourth-order quadrature weights on n equispaced points:
    Simpson's rule, closed with a 3/8 panel when n is even.
    """
    if n < 1:
        return np.zeros(0)
    if n == 1:
        return np.zeros(1)
    if n == 2:
        return np.array([0.5, 0.5]) * dt
    w = np.zeros(n)
    m = n if n % 2 == 1 else n - 3
    if m >= 3:
        w[0:m:2] += 2.0
        w[1:m:2] += 4.0
        w[0] -= 1.0
        w[m - 1] -= 1.0
        w[:m] *= dt / 3.0
    if n % 2 == 0:
        start = n - 4 if m >= 3 else 0
        w[start:start + 4] += np.array([1.0, 3.0, 3.0, 1.0]) * 3.0 * dt / 8.0
    return w


def toeplitz_quadratic_form(a, lag_values, b, dt: float) -> float:
    """
    Double integral of a(t) K(|t-t'|) b(t') over the support grid.

    Args:
        a, b: samples on the support grid (length n)
        lag_values: K at lags k*dt, k=0..n-1 at least
        dt: grid step

    Returns:
        The quadrature value
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size
    if n < 2:
        return 0.0
    w = simpson_weights(n, dt)
    kb = matmul_toeplitz(np.asarray(lag_values[:n], dtype=float), w * b)
    return float(np.dot(w * a, kb))


def _quadratic(values, x):
    """Lagrange quadratic through (0, v0), (1, v1), (2, v2) evaluated at x."""
    v0, v1, v2 = values
    return 0.5 * v0 * (x - 1.0) * (x - 2.0) - v1 * x * (x - 2.0) + 0.5 * v2 * x * (x - 1.0)


def causal_convolution(kernel, signal, dt: float) -> np.ndarray:
    """
    [kernel * signal](t_i) = integral over [0, t_i] of kernel(t_i - s) signal(s) ds,
    fourth-order throughout. The first panel integrates the product of quadratic
    interpolants of kernel and signal, each built on its own side of the panel,
    so a kink of the kernel at zero lag stays outside the interpolation.
    """
    kernel = np.asarray(kernel, dtype=float)
    signal = np.asarray(signal, dtype=float)
    n = signal.size
    out = np.zeros(n)
    if n < 2:
        return out
    if n >= 3 and kernel.size >= 3:
        nodes, weights = np.polynomial.legendre.leggauss(3)
        u = 0.5 * (nodes + 1.0)
        out[1] = 0.5 * dt * np.sum(weights * _quadratic(signal[:3], u) * _quadratic(kernel[:3], 1.0 - u))
    else:
        out[1] = 0.5 * dt * (kernel[1] * signal[0] + kernel[0] * signal[1])
    for i in range(2, n):
        w = simpson_weights(i + 1, dt)
        out[i] = np.dot(w, kernel[i::-1] * signal[:i + 1])
    return out
