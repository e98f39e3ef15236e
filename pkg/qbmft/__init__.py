import click

from qbmft.commands import register_commands

__version__ = '1.0.0'


def create_cli():
    @click.group(name='qbmft')
    @click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
                  help='Experiment configuration (JSON).')
    @click.option('--output', 'output_dir', type=click.Path(file_okay=False), default=None,
                  help='Output directory (overrides the config and QBMFT_OUTPUT_DIR).')
    @click.option('--verbose', is_flag=True, help='Debug logging.')
    @click.version_option(__version__, prog_name='qbmft')
    @click.pass_context
    def cli(ctx, config_path, output_dir, verbose):
        """Fluctuation theorems for quantum Brownian motion."""
        ctx.ensure_object(dict)
        ctx.obj.update({'config_path': config_path, 'output_dir': output_dir, 'verbose': verbose})

    # Register subcommands
    register_commands(cli)

    return cli
