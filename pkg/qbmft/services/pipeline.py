"""
Experiment orchestration: builds the bath, Green's and thermal tables from a
configuration and runs the analytic and Monte Carlo work pipelines.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from qbmft.models.experiment_config import ExperimentConfig
from qbmft.models.greens_solutions import GreensSolutions
from qbmft.models.history_pair import HistoryPair
from qbmft.models.kernel_table import KernelTable
from qbmft.models.protocol import ForceProtocol
from qbmft.models.spectral_density import BathKind, SpectralDensity
from qbmft.services import bath, dechist, greens, mc, thermal, work
from qbmft.utils.error_handling import StatisticalQualityError

logger = logging.getLogger(__name__)

MIN_EFFECTIVE_SAMPLES = 30
CROOKS_GRID_POINTS = 81


@dataclass(frozen=True, eq=False)
class Experiment:
    config: ExperimentConfig
    spectral_density: SpectralDensity
    protocol: ForceProtocol
    kernels: KernelTable
    gs: GreensSolutions

    @property
    def beta(self) -> float:
        return self.kernels.beta

    @property
    def hbar(self) -> float:
        return self.kernels.hbar

    @property
    def M(self) -> float:
        return self.gs.M

    @property
    def Omega(self) -> float:
        return self.gs.Omega


def spectral_density_from(config: ExperimentConfig) -> SpectralDensity:
    b = config.bath
    kind = BathKind(b.kind)
    cutoff = None if kind == BathKind.OHMIC_NO_CUTOFF else b.cutoff
    exponent = b.exponent if kind == BathKind.POWER_LAW else None
    return SpectralDensity(kind, b.gamma0, config.system.M, cutoff, exponent)


def protocol_from(config: ExperimentConfig) -> ForceProtocol:
    p = config.protocol
    return ForceProtocol(p.shape, p.amplitude, p.tau, p.f0, p.width, p.cycles)


def prepare(config: ExperimentConfig) -> Experiment:
    """Kernel table and Green's functions on the configured grid."""
    sd = spectral_density_from(config)
    dt = config.numerics.dt
    n = int(round(config.numerics.horizon / dt)) + 1
    kernels = bath.build_kernel_table(sd, config.bath.beta, config.effective_hbar, dt, n)
    gs = greens.solve_homogeneous(kernels, config.system.M, config.system.Omega)
    return Experiment(config, sd, protocol_from(config), kernels, gs)


def analytic_work(exp: Experiment) -> dict:
    """Forward and reverse Gaussian work laws with both fluctuation-theorem checks."""
    n = exp.protocol.grid(exp.gs.dt).size
    corr = thermal.stationary_correlation(exp.gs, exp.kernels, n)
    forward = work.work_distribution(exp.protocol, exp.gs, exp.kernels, 'forward', corr)
    reverse = work.work_distribution(exp.protocol, exp.gs, exp.kernels, 'reverse', corr)
    jarzynski = work.jarzynski_check(forward)
    report = {
        'forward': forward.to_dict(),
        'reverse': reverse.to_dict(),
        'jarzynski': jarzynski,
        'regime': work.regime_classifier(exp.protocol, exp.spectral_density, exp.beta, exp.hbar),
    }
    if forward.varW > 0:
        spread = 4.0 * forward.std
        grid = np.linspace(forward.meanW - spread, forward.meanW + spread, CROOKS_GRID_POINTS)
        crooks = work.crooks_check(forward, reverse, grid)
        crooks.pop('residuals')
        report['crooks'] = crooks
    return report


def monte_carlo_work(exp: Experiment, samples: int = None, seed: int = None, workers: int = None):
    """
    Forward and reverse work samples from the configured oracle.

    Returns:
        (forward, reverse) sample arrays
    """
    cfg = exp.config.mc
    samples = cfg.samples if samples is None else samples
    seed = cfg.seed if seed is None else seed
    workers = cfg.threads if workers is None else workers
    modes = exp.config.discrete_modes
    if modes:
        db = mc.discretize_bath(exp.spectral_density, modes, exp.beta, exp.Omega)
        forward = mc.discrete_bath_oracle(db, exp.protocol, samples, seed, workers=workers)
        reverse = mc.discrete_bath_oracle(db, exp.protocol.reversed(), samples, seed + 1, workers=workers)
        return forward, reverse

    n_points = min(exp.kernels.n, exp.gs.n)
    forward_noise = mc.synthesize_noise(exp.kernels, n_points, samples, seed)
    reverse_noise = mc.synthesize_noise(exp.kernels, n_points, samples, seed + 1)
    forward = mc.sample_work(forward_noise, exp.protocol, exp.gs, workers)
    reverse = mc.sample_work(reverse_noise, exp.protocol.reversed(), exp.gs, workers)
    return forward, reverse


def decoherence_report(exp: Experiment) -> dict:
    """Resolvability flag plus the exponents for the mean history and a shifted copy."""
    sigma = exp.config.dechist.sigma
    if sigma is None:
        sigma = dechist.resolvability_report(exp.kernels, 1.0, exp.Omega)['recommended_sigma']
    report = dechist.resolvability_report(exp.kernels, sigma, exp.Omega)
    t = exp.protocol.grid(exp.gs.dt)
    if t.size <= dechist.MAX_GRID:
        U = work.mean_trajectory(exp.protocol, exp.gs)
        separation = exp.config.dechist.separation_scale * report['min_separation']
        hp = HistoryPair(U, np.full(t.size, separation), sigma, exp.gs.dt)
        report.update(dechist.decoherence_exponent(hp, exp.kernels, exp.M, exp.Omega,
                                                   force=exp.protocol.value(t)))
        report['separation'] = separation
    else:
        logger.warning(f"Protocol grid of {t.size} points exceeds the decoherence grid limit; "
                       f"exponents skipped")
    return report


def verify_ft(config: ExperimentConfig, workers: int = None) -> dict:
    """
    Full pipeline: kernels, Green's functions, analytic work statistics and
    the Monte Carlo cross-check, reduced to one verdict.
    """
    exp = prepare(config)
    analytic = analytic_work(exp)
    forward, reverse = monte_carlo_work(exp, workers=workers)
    deltaF = analytic['forward']['deltaF']
    estimators = mc.empirical_ft_estimators(forward, reverse, exp.beta, deltaF, bins=config.mc.bins)
    jarzynski = estimators['jarzynski']
    if jarzynski['n_eff'] < MIN_EFFECTIVE_SAMPLES:
        raise StatisticalQualityError(f"effective sample size {jarzynski['n_eff']:.1f} is below "
                                      f"{MIN_EFFECTIVE_SAMPLES}", details={'n_eff': jarzynski['n_eff']})
    crooks = analytic.get('crooks', {})
    return {
        'jarzynski_residual_analytic': analytic['jarzynski']['residual'],
        'jarzynski_estimate_mc': jarzynski['ratio'],
        'jarzynski_estimate_mc_stderr': jarzynski['ratio_stderr'],
        'crooks_slope': crooks.get('slope'),
        'crooks_slope_mc': estimators['crooks']['slope'],
        'crooks_slope_mc_stderr': estimators['crooks']['slope_stderr'],
        'regime': analytic['regime']['regime'],
        'decoherence_flag': decoherence_report(exp)['flag'],
        'heavy_tail': estimators['heavy_tail'],
        'meanW': analytic['forward']['meanW'],
        'varW': analytic['forward']['varW'],
        'deltaF': deltaF,
        'mc_meanW': estimators['moments']['mean'],
        'mc_meanW_stderr': estimators['moments']['stderr'],
        'mc_varW': estimators['moments']['var'],
    }


SWEEP_COLUMNS = ['value', 'meanW', 'varW', 'deltaF', 'jarzynski_residual', 'crooks_slope',
                 'regime']


def sweep(config: ExperimentConfig, param: str, values, workers: int = 1):
    """
    Analytic work statistics over a parameter grid, in input order.

    Returns:
        list of rows matching SWEEP_COLUMNS
    """
    configs = [config.with_value(param, value) for value in values]

    def point(item):
        value, cfg = item
        report = analytic_work(prepare(cfg))
        logger.info(f"Sweep {param}={value}: residual {report['jarzynski']['residual']:.3e}")
        return [float(value), report['forward']['meanW'], report['forward']['varW'],
                report['forward']['deltaF'], report['jarzynski']['residual'],
                report.get('crooks', {}).get('slope', float('nan')), report['regime']['regime']]

    items = list(zip(values, configs))
    if workers <= 1:
        return [point(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(point, items))
