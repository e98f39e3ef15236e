import click
import numpy as np

from qbmft.commands.common import emit, run_command, table
from qbmft.services import greens
from qbmft.services.pipeline import prepare
from qbmft.utils.error_handling import handle_command_errors


@click.command('greens')
@click.option('--bromwich/--no-bromwich', default=False,
              help='Cross-check against the FFT Laplace inversion.')
@click.pass_context
@handle_command_errors('greens')
def greens_cmd(ctx, bromwich):
    """Solve for the homogeneous solutions h(t) and g(t)."""
    def body(config, out):
        exp = prepare(config)
        gs = exp.gs
        table(out, config, 'greens.csv', ['t', 'h', 'g', 'hdot', 'gdot'],
              zip(gs.times, gs.h, gs.g, gs.hdot, gs.gdot))
        res_h, res_g = greens.hg_relation_residuals(gs, exp.kernels)
        report = {'method': gs.method, 'n': gs.n, 'dt': gs.dt,
                  'hdot_residual': res_h, 'gdot_residual': res_g}
        if bromwich:
            inverse = greens.bromwich_greens(exp.spectral_density, gs.M, gs.Omega, gs.dt, gs.n)
            report['bromwich_max_deviation'] = {
                'h': float(np.max(np.abs(inverse.h - gs.h))),
                'g': float(np.max(np.abs(inverse.g - gs.g))),
            }
        emit(out, config, 'greens.json', report)

    run_command(ctx, 'greens', body)
