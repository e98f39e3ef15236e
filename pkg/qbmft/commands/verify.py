import click

from qbmft.commands.common import emit, run_command, table
from qbmft.services.pipeline import SWEEP_COLUMNS, sweep, verify_ft
from qbmft.utils.error_handling import ConfigError, handle_command_errors


@click.command('verify-ft')
@click.option('--samples', type=int, default=None, help='Number of realizations.')
@click.option('--seed', type=int, default=None, help='Base random seed.')
@click.option('--threads', type=int, default=None, help='Worker threads.')
@click.pass_context
@handle_command_errors('verify-ft')
def verify_ft_cmd(ctx, samples, seed, threads):
    """Run the full pipeline and emit a single fluctuation-theorem verdict."""
    def body(config, out):
        emit(out, config, 'verdict.json', verify_ft(config))

    run_command(ctx, 'verify-ft', body, stochastic=True, mc__samples=samples, mc__seed=seed,
                mc__threads=threads)


def _parse_values(values):
    try:
        return [float(v) for v in values.split(',') if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {values!r}",
                          field_errors=[f"--values={values!r}: expected numbers"])


@click.command('sweep')
@click.option('--param', required=True, help="Dotted config field, e.g. 'bath.hbar'.")
@click.option('--values', required=True, help='Comma-separated values.')
@click.pass_context
@handle_command_errors('sweep')
def sweep_cmd(ctx, param, values):
    """Analytic work statistics over a parameter grid (CSV)."""
    points = _parse_values(values)

    def body(config, out):
        rows = sweep(config, param, points, config.mc.threads)
        table(out, config, 'sweep.csv', SWEEP_COLUMNS, rows)
        emit(out, config, 'sweep.json', {'param': param, 'values': points,
                                         'rows': [dict(zip(SWEEP_COLUMNS, row)) for row in rows]})

    run_command(ctx, 'sweep', body)
