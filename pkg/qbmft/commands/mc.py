import click

from qbmft.commands.common import emit, run_command, table
from qbmft.services import mc
from qbmft.services.pipeline import monte_carlo_work, prepare
from qbmft.services.thermal import delta_F
from qbmft.utils.error_handling import handle_command_errors


@click.command('mc')
@click.option('--samples', type=int, default=None, help='Number of realizations.')
@click.option('--seed', type=int, default=None, help='Base random seed.')
@click.option('--mode', type=click.Choice(['quantum', 'classical']), default=None)
@click.option('--oracle', default=None, help="'continuum' or 'discrete:N'.")
@click.option('--threads', type=int, default=None, help='Worker threads.')
@click.pass_context
@handle_command_errors('mc')
def mc_cmd(ctx, samples, seed, mode, oracle, threads):
    """Monte Carlo work samples and empirical fluctuation-theorem estimators."""
    def body(config, out):
        exp = prepare(config)
        forward, reverse = monte_carlo_work(exp)
        table(out, config, 'work_samples.csv', ['index', 'W_forward', 'W_reverse'],
              ((i, float(a), float(b)) for i, (a, b) in enumerate(zip(forward, reverse))))
        p = exp.protocol
        deltaF = delta_F(p.f_start, p.f_end, exp.M, exp.Omega)
        report = mc.empirical_ft_estimators(forward, reverse, exp.beta, deltaF, bins=config.mc.bins)
        report['oracle'] = config.mc.oracle
        report['seed'] = config.mc.seed
        emit(out, config, 'mc_report.json', report)

    run_command(ctx, 'mc', body, stochastic=True, mc__samples=samples, mc__seed=seed, mc__mode=mode,
                mc__oracle=oracle, mc__threads=threads)
