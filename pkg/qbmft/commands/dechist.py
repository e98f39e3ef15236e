import click

from qbmft.commands.common import emit, run_command
from qbmft.services.pipeline import decoherence_report, prepare
from qbmft.utils.error_handling import handle_command_errors


@click.command('dechist')
@click.option('--sigma', type=float, default=None, help='Resolution width (defaults to the recommended one).')
@click.option('--separation-scale', type=float, default=None, help='Separation in units of u*.')
@click.pass_context
@handle_command_errors('dechist')
def dechist_cmd(ctx, sigma, separation_scale):
    """Decoherence exponents and the trajectory-resolvability report."""
    def body(config, out):
        emit(out, config, 'dechist.json', decoherence_report(prepare(config)))

    run_command(ctx, 'dechist', body, dechist__sigma=sigma, dechist__separation_scale=separation_scale)
