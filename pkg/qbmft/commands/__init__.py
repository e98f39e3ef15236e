from qbmft.commands.kernels import kernels_cmd
from qbmft.commands.greens import greens_cmd
from qbmft.commands.thermal import thermal_cmd
from qbmft.commands.work import work_cmd, expand_cmd
from qbmft.commands.mc import mc_cmd
from qbmft.commands.dechist import dechist_cmd
from qbmft.commands.verify import verify_ft_cmd, sweep_cmd


def register_commands(cli):
    """Register all subcommands with the group"""
    cli.add_command(kernels_cmd)
    cli.add_command(greens_cmd)
    cli.add_command(thermal_cmd)
    cli.add_command(work_cmd)
    cli.add_command(expand_cmd)
    cli.add_command(mc_cmd)
    cli.add_command(dechist_cmd)
    cli.add_command(verify_ft_cmd)
    cli.add_command(sweep_cmd)
