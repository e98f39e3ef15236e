import click

from qbmft.commands.common import emit, run_command, table
from qbmft.services import bath
from qbmft.services.pipeline import spectral_density_from
from qbmft.utils.error_handling import handle_command_errors


@click.command('kernels')
@click.pass_context
@handle_command_errors('kernels')
def kernels_cmd(ctx):
    """Tabulate the damping and noise kernels and their spectra."""
    def body(config, out):
        sd = spectral_density_from(config)
        dt = config.numerics.dt
        n = int(round(config.numerics.horizon / dt)) + 1
        kernels = bath.build_kernel_table(sd, config.bath.beta, config.effective_hbar, dt, n)
        table(out, config, 'kernels.csv', ['t', 'gamma', 'nu'],
              zip(kernels.times, kernels.gamma, kernels.nu))
        table(out, config, 'spectra.csv', ['omega', 'gamma_ft', 'nu_ft'],
              zip(kernels.omega, kernels.gamma_ft, kernels.nu_ft))
        emit(out, config, 'kernels.json', {
            'spectral_density': sd.to_dict(),
            'beta': kernels.beta,
            'hbar': kernels.hbar,
            'dt': dt,
            'n': kernels.n,
            'fdr_violation': kernels.fdr_violation,
        })

    run_command(ctx, 'kernels', body)
