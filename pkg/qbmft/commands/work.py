import click
import numpy as np

from qbmft.commands.common import emit, run_command, table
from qbmft.services import thermal, work
from qbmft.services.pipeline import analytic_work, prepare
from qbmft.utils.error_handling import handle_command_errors


@click.command('work')
@click.pass_context
@handle_command_errors('work')
def work_cmd(ctx):
    """Analytic work statistics and fluctuation-theorem checks."""
    def body(config, out):
        report = analytic_work(prepare(config))
        emit(out, config, 'work.json', {
            'meanW': report['forward']['meanW'],
            'varW': report['forward']['varW'],
            'deltaF': report['forward']['deltaF'],
            'jarzynski_residual': report['jarzynski']['residual'],
            'crooks_slope': report.get('crooks', {}).get('slope'),
            'regime': report['regime']['regime'],
            'details': report,
        })

    run_command(ctx, 'work', body)


@click.command('expand')
@click.option('--n-max', type=int, default=None, help='High-temperature series order (<= 10).')
@click.option('--k-max', type=int, default=None, help='Low-temperature exponential terms.')
@click.pass_context
@handle_command_errors('expand')
def expand_cmd(ctx, n_max, k_max):
    """High- and low-temperature expansions of the work variance."""
    def body(config, out):
        exp = prepare(config)
        beta, hbar = exp.beta, exp.hbar
        series = work.hightemp_correction(exp.protocol, exp.gs, beta, hbar, config.numerics.series_order)
        table(out, config, 'hightemp_series.csv',
              ['n', 'coefficient', 'term_frequency', 'term_time'],
              [(n + 1, c, a, b) for n, (c, a, b) in
               enumerate(zip(series['coefficients'], series['terms'], series['time_terms']))])
        report = {k: v for k, v in series.items() if k not in ('terms', 'time_terms', 'coefficients')}
        report['regime'] = work.regime_classifier(exp.protocol, exp.spectral_density, beta, hbar)
        if hbar > 0:
            omega = np.linspace(0.0, 10.0 * max(exp.Omega, 1.0 / (beta * hbar)), 401)
            values, bound = work.lowtemp_sigma_ft(omega, exp.gs, beta, hbar, config.numerics.lowtemp_terms)
            exact = thermal.sigma_xx_spectrum(exp.spectral_density, beta, hbar, exp.M, exp.Omega, omega)
            table(out, config, 'lowtemp_sigma_ft.csv', ['omega', 'expansion', 'exact', 'bound'],
                  zip(omega, values, exact, bound))
        emit(out, config, 'expand.json', report)

    run_command(ctx, 'expand', body, numerics__series_order=n_max, numerics__lowtemp_terms=k_max)
