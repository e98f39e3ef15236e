"""
Monte Carlo oracles: colored-noise sampling of the stationary Langevin
solution, empirical fluctuation-theorem estimators and an exact classical
simulation of a finite discretized bath.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import signal, stats
from scipy.special import logsumexp

from qbmft.models.discrete_bath import DiscreteBath
from qbmft.models.greens_solutions import GreensSolutions
from qbmft.models.kernel_table import KernelTable
from qbmft.models.noise_ensemble import NoiseEnsemble
from qbmft.models.protocol import ForceProtocol
from qbmft.models.spectral_density import SpectralDensity
from qbmft.services import bath, greens, work
from qbmft.utils.error_handling import (DivergenceError, DomainError, GridMismatchError,
                                        NumericalError, StatisticalQualityError)
from qbmft.utils.numerics import simpson_weights

logger = logging.getLogger(__name__)

BLOCK_SIZE = 256
MIN_ESTIMATOR_SAMPLES = 1000
HEAVY_TAIL_THRESHOLD = 3.0
MIN_BIN_COUNT = 10
HISTORY_WARNING = 1e-8
STEPS_PER_MODE_PERIOD = 20


def _blocks(size: int, block_size: int = BLOCK_SIZE):
    return [(start, min(start + block_size, size)) for start in range(0, size, block_size)]


def _run_blocks(fn, size: int, workers: int = 1):
    """Evaluate fn(start, stop) over fixed blocks and concatenate in block order."""
    blocks = _blocks(size)
    if workers <= 1 or len(blocks) == 1:
        parts = [fn(start, stop) for start, stop in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(lambda b: fn(*b), blocks))
    return np.concatenate(parts, axis=0)


def synthesize_noise(kernels: KernelTable, n_points: int, N: int, seed: int) -> NoiseEnsemble:
    """
    Stationary Gaussian noise with covariance hbar*nu by FFT spectral synthesis
    on the circulant embedding of the kernel table.

    Args:
        kernels: kernel table carrying the noise spectrum
        n_points: samples per realization (at most kernels.n)
        N: number of realizations
        seed: base seed; realization i uses the stream (seed, i)

    Returns:
        NoiseEnsemble (lazy)
    """
    if kernels.local and kernels.hbar > 0:
        raise DivergenceError("quantum noise needs a cutoff bath", module='mc')
    spectrum = kernels.nu_ft
    if np.min(spectrum) < bath.NEGATIVE_SPECTRUM_FLOOR * max(np.max(spectrum), 1e-300):
        raise NumericalError("negative noise spectrum; cannot synthesize", module='mc')
    logger.info(f"Noise ensemble: N={N}, n_points={n_points}, seed={seed}, hbar={kernels.hbar}")
    return NoiseEnsemble(kernels, n_points, N, seed)


def _layout(ens: NoiseEnsemble, protocol: ForceProtocol, gs: GreensSolutions):
    """(support grid, history points) for noise samples s_j = (j - n_h) dt."""
    if not np.isclose(ens.dt, gs.dt, rtol=1e-12):
        raise GridMismatchError("noise and Green's tables use different steps", module='mc')
    t = protocol.grid(gs.dt)
    history = ens.n_points - t.size
    if history < 1:
        raise GridMismatchError(f"noise window of {ens.n_points} points is shorter than the protocol",
                                module='mc')
    if ens.n_points > gs.n:
        raise GridMismatchError(f"noise window exceeds Green's table ({gs.n} points)", module='mc')
    tail = abs(gs.g[history]) * gs.M * gs.Omega
    if tail > HISTORY_WARNING:
        logger.warning(f"Noise history {history * gs.dt:.4g} short of the memory of g "
                       f"(|M Omega g| = {tail:.2e})")
    return t, history


def sample_trajectories(ens: NoiseEnsemble, protocol: ForceProtocol, gs: GreensSolutions,
                        workers: int = 1) -> np.ndarray:
    """
    X(t) = [g_ret f](t) + [g_ret xi](t) on the protocol grid, one row per
    realization, with the stationary (infinite-past) preparation.
    """
    t, history = _layout(ens, protocol, gs)
    mean = work.mean_trajectory(protocol, gs)

    def run(start, stop):
        response = greens.apply_retarded(gs, ens.block(start, stop))
        return mean + response[:, history:history + t.size]

    return _run_blocks(run, ens.size, workers)


def _noise_work_weights(protocol: ForceProtocol, gs: GreensSolutions, t, n_points):
    """K_p = sum_i a_i g(t_i - s_p) so that the noise work is -dt * xi . K."""
    a = simpson_weights(t.size, gs.dt) * protocol.derivative(t)
    return signal.fftconvolve(gs.g, a[::-1])[:n_points][::-1]


def sample_work(ens: NoiseEnsemble, protocol: ForceProtocol, gs: GreensSolutions,
                workers: int = 1) -> np.ndarray:
    """Work samples W = -int fdot X dt for every realization."""
    t, history = _layout(ens, protocol, gs)
    fdot = protocol.derivative(t)
    if not np.any(fdot):
        return np.zeros(ens.size)
    mean = -float(np.dot(simpson_weights(t.size, gs.dt), fdot * work.mean_trajectory(protocol, gs)))
    weights = _noise_work_weights(protocol, gs, t, ens.n_points)

    def run(start, stop):
        return mean - gs.dt * (ens.block(start, stop) @ weights)

    samples = _run_blocks(run, ens.size, workers)
    logger.info(f"Work samples: N={samples.size}, mean={samples.mean():.6g}, var={samples.var(ddof=1):.6g}")
    return samples


def work_moments(samples) -> dict:
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < 2:
        raise DomainError("at least two work samples are needed", module='mc')
    std = float(samples.std(ddof=1))
    return {
        'n': n,
        'mean': float(samples.mean()),
        'var': float(samples.var(ddof=1)),
        'std': std,
        'stderr': std / np.sqrt(n),
        'skewness': float(stats.skew(samples)) if std > 0 else 0.0,
        'skewness_stderr': float(np.sqrt(6.0 / n)),
    }


def _jarzynski_estimate(samples, beta, deltaF):
    x = -beta * samples
    n = x.size
    log_mean = logsumexp(x) - np.log(n)
    # jackknife over leave-one-out log means
    shifted = np.exp(x - x.max())
    total = shifted.sum()
    loo = x.max() + np.log(np.clip(total - shifted, 1e-300, None)) - np.log(n - 1)
    ratios = np.exp(loo + beta * deltaF)
    stderr = float(np.sqrt((n - 1) / n * np.sum((ratios - ratios.mean()) ** 2)))
    weights = shifted / total
    return {
        'estimate': float(np.exp(log_mean)),
        'log_estimate': float(log_mean),
        'target': float(np.exp(-beta * deltaF)),
        'ratio': float(np.exp(log_mean + beta * deltaF)),
        'ratio_stderr': stderr,
        'deviation': float(np.expm1(log_mean + beta * deltaF)),
        'n_eff': float(1.0 / np.sum(weights ** 2)),
    }


def _crooks_fit(forward, reverse, beta, deltaF, bins):
    lo = min(forward.min(), -reverse.max())
    hi = max(forward.max(), -reverse.min())
    edges = np.linspace(lo, hi, bins + 1)
    counts_f, _ = np.histogram(forward, edges)
    counts_r, _ = np.histogram(-reverse, edges)
    usable = (counts_f >= MIN_BIN_COUNT) & (counts_r >= MIN_BIN_COUNT)
    centres = 0.5 * (edges[1:] + edges[:-1])
    if usable.sum() < 3:
        logger.warning("Crooks histogram: fewer than three overlapping bins")
        return {'slope': float('nan'), 'slope_stderr': float('nan'), 'intercept': float('nan'),
                'crossing': float('nan'), 'bins_used': int(usable.sum())}
    nf, nr = counts_f[usable], counts_r[usable]
    log_ratio = np.log(nf / forward.size) - np.log(nr / reverse.size)
    sigma = np.sqrt(1.0 / nf + 1.0 / nr)
    (slope, intercept), cov = np.polyfit(centres[usable], log_ratio, 1, w=1.0 / sigma, cov='unscaled')
    return {
        'slope': float(slope),
        'slope_stderr': float(np.sqrt(cov[0, 0])),
        'intercept': float(intercept),
        'crossing': float(-intercept / slope) if slope != 0 else float('nan'),
        'ideal_slope': beta,
        'ideal_crossing': deltaF,
        'bins_used': int(usable.sum()),
    }


def empirical_ft_estimators(forward, reverse, beta: float, deltaF: float, bins: int = 40,
                            min_samples: int = MIN_ESTIMATOR_SAMPLES) -> dict:
    """
    Jarzynski sample mean with jackknife error and, when reverse samples are
    given, the histogram fit of log P_F(W) - log P_R(-W).
    """
    forward = np.asarray(forward, dtype=float)
    if forward.size == 0:
        raise DomainError("no work samples", module='mc')
    if forward.size < min_samples:
        raise StatisticalQualityError(f"{forward.size} samples is below the minimum {min_samples}",
                                      details={'n': int(forward.size)})
    report = {'moments': work_moments(forward), 'jarzynski': _jarzynski_estimate(forward, beta, deltaF)}
    spread = beta * report['moments']['std']
    report['heavy_tail'] = bool(spread > HEAVY_TAIL_THRESHOLD)
    if report['heavy_tail']:
        logger.warning(f"beta*sigma_W = {spread:.2f}: exponential average dominated by rare samples "
                       f"(N_eff = {report['jarzynski']['n_eff']:.1f})")
    if reverse is not None:
        reverse = np.asarray(reverse, dtype=float)
        if reverse.size == 0:
            raise DomainError("no reverse work samples", module='mc')
        report['reverse_moments'] = work_moments(reverse)
        report['crooks'] = _crooks_fit(forward, reverse, beta, deltaF, bins)
    return report


def discretize_bath(sd: SpectralDensity, n_modes: int, beta: float, Omega: float,
                    omega_max: float = None) -> DiscreteBath:
    """
    Uniform modes w_n = n dw on (0, omega_max], m_n = 1 and
    c_n^2 = 2 m_n w_n J(w_n) dw.
    """
    if n_modes < 1:
        raise DomainError("n_modes must be positive", module='mc')
    if omega_max is None:
        if sd.cutoff is None:
            raise DomainError("omega_max is required for the cutoff-free bath", module='mc')
        omega_max = 10.0 * sd.cutoff
    d_omega = omega_max / n_modes
    frequencies = d_omega * np.arange(1, n_modes + 1)
    masses = np.ones(n_modes)
    couplings = np.sqrt(2.0 * masses * frequencies * bath.spectral_density(sd, frequencies) * d_omega)
    return DiscreteBath(frequencies, masses, couplings, beta, sd.M, Omega, d_omega, sd)


def recurrence_time(db: DiscreteBath) -> float:
    return 2.0 * np.pi / db.d_omega


def _thermal_start(db: DiscreteBath, f0: float, seed: int, start: int, stop: int):
    """Exact classical thermal phase-space samples of the combined system at force f0."""
    beta, M, Omega = db.beta, db.M, db.Omega
    n = db.n_modes
    stiffness = db.stiffness
    z = np.stack([np.random.default_rng([seed, index]).standard_normal(2 * n + 2)
                  for index in range(start, stop)])
    x = f0 / (M * Omega ** 2) + z[:, 0] / np.sqrt(beta * M * Omega ** 2)
    p = z[:, 1] * np.sqrt(M / beta)
    q = np.outer(x, db.couplings / stiffness) + z[:, 2:2 + n] / np.sqrt(beta * stiffness)
    pq = z[:, 2 + n:] * np.sqrt(db.masses / beta)
    return x, p, q, pq


def _forces(db: DiscreteBath, x, q, f):
    fx = -(db.M * db.Omega ** 2 + db.renormalization) * x + f + q @ db.couplings
    fq = -db.stiffness * q + np.outer(x, db.couplings)
    return fx, fq


def _leapfrog_step(db: DiscreteBath, state, forces, h, f_next):
    """One kick-drift-kick step; returns the new state and forces."""
    x, p, q, pq = state
    fx, fq = forces
    p = p + 0.5 * h * fx
    pq = pq + 0.5 * h * fq
    x = x + h * p / db.M
    q = q + h * pq / db.masses
    fx, fq = _forces(db, x, q, f_next)
    p = p + 0.5 * h * fx
    pq = pq + 0.5 * h * fq
    return (x, p, q, pq), (fx, fq)


def _substeps(db: DiscreteBath, dt: float) -> int:
    """Leapfrog sub-steps per grid step so that the step is <= 1/(20 omega_max)."""
    fastest = max(db.omega_max, db.Omega)
    return max(1, int(np.ceil(dt * STEPS_PER_MODE_PERIOD * fastest)))


def discrete_bath_oracle(db: DiscreteBath, protocol: ForceProtocol, N_samples: int, seed: int,
                         horizon: float = None, dt: float = None, workers: int = 1) -> np.ndarray:
    """
    Classical work samples of the closed system+bath Hamiltonian driven by the
    protocol, started from the combined thermal state at t=0 and integrated
    with leapfrog.

    Args:
        db: discretized bath (carries beta, M and Omega)
        protocol: force protocol
        N_samples: number of trajectories
        seed: base seed; sample i uses the stream (seed, i)
        horizon: simulated span checked against the recurrence time (defaults to tau)
        dt: work quadrature step (defaults to tau/64 or finer)
        workers: thread count

    Returns:
        Work samples
    """
    horizon = protocol.tau if horizon is None else horizon
    recurrence = recurrence_time(db)
    if horizon > recurrence:
        logger.warning(f"Horizon {horizon:.4g} exceeds the discrete-bath recurrence time {recurrence:.4g}")
    if dt is None:
        dt = protocol.tau / 64
    t = protocol.grid(dt)
    substeps = _substeps(db, dt)
    h = dt / substeps
    fine_t = np.arange((t.size - 1) * substeps + 1) * h
    force = protocol.value(fine_t)
    a = simpson_weights(t.size, dt) * protocol.derivative(t)
    logger.info(f"Discrete-bath oracle: {db.n_modes} modes, N={N_samples}, step {h:.3g}, "
                f"{fine_t.size - 1} steps")

    def run(start, stop):
        state = _thermal_start(db, force[0], seed, start, stop)
        forces = _forces(db, state[0], state[2], force[0])
        W = -a[0] * state[0]
        for k in range(1, fine_t.size):
            state, forces = _leapfrog_step(db, state, forces, h, force[k])
            if k % substeps == 0:
                W = W - a[k // substeps] * state[0]
        return W

    return _run_blocks(run, N_samples, workers)


def _shadow_energy(db: DiscreteBath, state, f: float, operator: np.ndarray) -> np.ndarray:
    """Modified energy conserved exactly by the leapfrog map of a quadratic Hamiltonian."""
    x, p, q, pq = state
    masses = np.concatenate([[db.M], db.masses])
    x_eq = f / (db.M * db.Omega ** 2)
    y = np.column_stack([x - x_eq, q - np.outer(np.full(x.shape, x_eq), db.couplings / db.stiffness)])
    z = y * np.sqrt(masses)
    momenta = np.column_stack([p, pq]) / np.sqrt(masses)
    return 0.5 * np.sum(momenta ** 2, axis=1) + 0.5 * np.einsum('si,ij,sj->s', z, operator, z)


def leapfrog_energy_drift(db: DiscreteBath, f_const: float = 0.0, horizon: float = None,
                          h: float = None, samples: int = 4, seed: int = 0) -> float:
    """
    Largest relative change of the leapfrog shadow energy over the horizon at
    constant force, for thermal initial states.
    """
    horizon = recurrence_time(db) if horizon is None else horizon
    h = 1.0 / (STEPS_PER_MODE_PERIOD * max(db.omega_max, db.Omega)) if h is None else h
    steps = int(np.ceil(horizon / h))
    masses = np.concatenate([[db.M], db.masses])
    scale = 1.0 / np.sqrt(masses)
    Kw = db.stiffness_matrix() * np.outer(scale, scale)
    operator = Kw - 0.25 * h * h * (Kw @ Kw)

    state = _thermal_start(db, f_const, seed, 0, samples)
    forces = _forces(db, state[0], state[2], f_const)
    initial = _shadow_energy(db, state, f_const, operator)
    drift = 0.0
    for k in range(1, steps + 1):
        state, forces = _leapfrog_step(db, state, forces, h, f_const)
        if k % 64 == 0 or k == steps:
            energy = _shadow_energy(db, state, f_const, operator)
            drift = max(drift, float(np.max(np.abs(energy - initial) / np.abs(initial))))
    logger.info(f"Leapfrog shadow-energy drift over {steps} steps: {drift:.2e}")
    return drift
