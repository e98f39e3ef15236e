import click
import numpy as np

from qbmft.commands.common import emit, run_command, table
from qbmft.services import thermal
from qbmft.services.pipeline import prepare
from qbmft.utils.error_handling import handle_command_errors


@click.command('thermal')
@click.pass_context
@handle_command_errors('thermal')
def thermal_cmd(ctx):
    """Equilibrium variances, free energies and the stationary correlation."""
    def body(config, out):
        exp = prepare(config)
        sd, beta, hbar, M, Omega = exp.spectral_density, exp.beta, exp.hbar, exp.M, exp.Omega
        momentum = not sd.local
        cutoff = config.numerics.matsubara_cutoff
        state = thermal.equilibrium_variances(sd, beta, hbar, M, Omega, config.numerics.tolerance,
                                              include_momentum=momentum, R=cutoff)
        p = exp.protocol
        free = thermal.free_energies(p.f_start, p.f_end, sd, beta, hbar, M, Omega, R=cutoff)
        n = p.grid(exp.gs.dt).size
        corr = thermal.stationary_correlation(exp.gs, exp.kernels, n)
        table(out, config, 'sigma_xx.csv', ['lag', 'sigma_xx'],
              zip(np.arange(corr.n) * corr.dt, corr.values))
        report = {'state': state.to_dict(), 'free_energies': free.to_dict(),
                  'correlation_truncation': corr.truncation_error}
        if not (sd.local and hbar > 0):
            value, tail = thermal.sigma_xx_frequency(sd, beta, hbar, M, Omega, 0.0)
            report['sigma_xx0_frequency'] = value
            report['sigma_xx0_frequency_tail'] = tail
        emit(out, config, 'thermal.json', report)

    run_command(ctx, 'thermal', body)
