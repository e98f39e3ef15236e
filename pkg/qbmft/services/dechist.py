"""
Gaussian-window decoherence exponents and the trajectory-resolvability
criterion sigma^2 ~ 1/nu.
"""

import logging

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, toeplitz

from qbmft.models.history_pair import HistoryPair
from qbmft.models.kernel_table import KernelTable
from qbmft.services import bath
from qbmft.utils.error_handling import ConditioningError, DomainError, GridMismatchError
from qbmft.utils.numerics import causal_convolution

logger = logging.getLogger(__name__)

MAX_GRID = 2048
VALID_RATIO = 1.0
QUANTUM_RATIO = 0.1


def langevin_operator(U, kernels: KernelTable, M: float, Omega: float) -> np.ndarray:
    """
    L U = M U'' + 2M int_0^t gamma(t-s) U'(s) ds + M Omega^2 U, with second-order
    finite differences for the derivatives.
    """
    U = np.asarray(U, dtype=float)
    n, dt = U.size, kernels.dt
    if n > kernels.n:
        raise GridMismatchError(f"history of {n} points exceeds kernel table ({kernels.n})",
                                module='dechist')
    if n < 3:
        raise DomainError("histories need at least three grid points", module='dechist')
    velocity = np.gradient(U, dt, edge_order=2)
    acceleration = np.gradient(velocity, dt, edge_order=2)
    if kernels.local:
        memory = kernels.spectral_density.gamma0 * velocity
    else:
        memory = causal_convolution(kernels.gamma[:n], velocity, dt)
    return M * acceleration + 2.0 * M * memory + M * Omega ** 2 * U


def _regularized_noise(hp: HistoryPair, kernels: KernelTable):
    """Cholesky factor of dt*nu + diag(1/(2 sigma^2))."""
    n = hp.n
    if n > MAX_GRID:
        raise DomainError(f"history grid of {n} points exceeds the {MAX_GRID}-point limit",
                          module='dechist')
    if n > kernels.n:
        raise GridMismatchError(f"history of {n} points exceeds kernel table ({kernels.n})",
                                module='dechist')
    if not np.isclose(hp.dt, kernels.dt, rtol=1e-12):
        raise GridMismatchError("history and kernel table use different steps", module='dechist')
    matrix = hp.dt * toeplitz(kernels.nu[:n]) + np.diag(0.5 / hp.sigma ** 2)
    try:
        return cho_factor(matrix, lower=True)
    except LinAlgError as e:
        diagonal = np.diag(matrix)
        raise ConditioningError(f"regularized noise matrix is not positive definite: {e}",
                                details={'min_diagonal': float(diagonal.min()),
                                         'max_diagonal': float(diagonal.max()), 'n': n})


def decoherence_exponent(hp: HistoryPair, kernels: KernelTable, M: float, Omega: float,
                         LU=None, force=None) -> dict:
    """
    Exponents of |D| ~ exp{-1/2 (LU).(nu + (2 sigma^2)^-1)^-1.(LU) - 1/2 u.(nu^-1 + 2 sigma^2)^-1.u}.

    The off-diagonal form uses (nu^-1 + S)^-1 = S^-1 - S^-1 (nu + S^-1)^-1 S^-1 with
    S = 2 sigma^2, so only the regularized matrix is factored.

    Args:
        hp: history pair
        kernels: kernel table on the history grid
        M, Omega: system mass and frequency
        LU: precomputed Langevin operator applied to U
        force: external force on the grid, subtracted from L.U

    Returns:
        dict with diag_exponent and offdiag_exponent (both <= 0)
    """
    factor = _regularized_noise(hp, kernels)
    LU = langevin_operator(hp.U, kernels, M, Omega) if LU is None else np.asarray(LU, dtype=float)
    if force is not None:
        LU = LU - np.asarray(force, dtype=float)
    if LU.shape != hp.U.shape:
        raise GridMismatchError("L.U does not match the history grid", module='dechist')
    dt = hp.dt
    diag = -0.5 * dt * float(LU @ cho_solve(factor, LU))

    weighted = hp.u * 0.5 / hp.sigma ** 2
    off_form = float(hp.u @ weighted) - float(weighted @ cho_solve(factor, weighted))
    offdiag = -0.5 * dt * max(off_form, 0.0)
    logger.debug(f"Decoherence exponents: diag={diag:.6g}, offdiag={offdiag:.6g}")
    return {'diag_exponent': diag, 'offdiag_exponent': offdiag}


def resolvability_report(kernels: KernelTable, sigma: float, Omega: float) -> dict:
    """
    Suppression scale u* = sqrt(1/nu_0 + 2 sigma^2), with nu_0 the noise
    strength accumulated over one system period, and the resolvability flag.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive", module='dechist')
    period = 2.0 * np.pi / Omega
    nu0 = bath.noise_strength(kernels.spectral_density, kernels.beta, kernels.hbar, period)
    if not nu0 > 0:
        raise DomainError(f"non-positive noise strength {nu0:.3e}", module='dechist')
    ratio = sigma ** 2 * nu0
    if ratio >= VALID_RATIO:
        flag = 'trajectories-valid'
    elif ratio < QUANTUM_RATIO:
        flag = 'quantum-dominated'
    else:
        flag = 'marginal'
    return {
        'nu0': float(nu0),
        'sigma': float(sigma),
        'sigma2_nu0': float(ratio),
        'min_separation': float(np.sqrt(1.0 / nu0 + 2.0 * sigma ** 2)),
        'flag': flag,
        'recommended_sigma': float(nu0 ** -0.5),
    }


def window_partition_sum(x, sigma: float) -> dict:
    """
    Weights of position samples x under Gaussian windows of width sigma
    centred on a sigma-spaced lattice. The windows form an approximate
    partition of unity, so the weights sum to about one.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("no samples to partition", module='dechist')
    if not sigma > 0:
        raise DomainError("sigma must be positive", module='dechist')
    first = np.floor(x.min() / sigma) - 6
    last = np.ceil(x.max() / sigma) + 6
    centres = sigma * np.arange(first, last + 1)
    windows = np.exp(-0.5 * ((x[:, None] - centres[None, :]) / sigma) ** 2) / np.sqrt(2.0 * np.pi)
    weights = windows.mean(axis=0)
    return {'total': float(weights.sum()), 'weights': weights, 'centres': centres}
