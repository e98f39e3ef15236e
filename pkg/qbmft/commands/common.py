import logging

import click

from qbmft.services.config_service import ConfigService
from qbmft.services.output_service import OutputService, configure_logging
from qbmft.utils.error_handling import QBMError, format_error_response

logger = logging.getLogger(__name__)


def load_config(ctx, **overrides):
    """
    Configuration for the current invocation: file, environment, then the
    --output flag and any per-subcommand overrides given as block.field=value.
    """
    obj = ctx.find_root().obj or {}
    config = ConfigService.get_config(obj.get('config_path'))
    if obj.get('output_dir'):
        config = config.with_value('output.directory', obj['output_dir'])
    for path, value in overrides.items():
        if value is not None:
            config = config.with_value(path.replace('__', '.'), value)
    return config


def run_command(ctx, name, body, stochastic=False, **overrides):
    """
    Load config, set up output and logging, run body(config, out) and write
    the manifest; failures are recorded in the manifest before re-raising.
    Stochastic commands record the effective mc.seed.
    """
    config = load_config(ctx, **overrides)
    seed = config.mc.seed if stochastic else None
    verbose = bool((ctx.find_root().obj or {}).get('verbose'))
    configure_logging(config.output.directory, verbose)
    out = OutputService(config.output.directory)
    logger.info(f"{name}: output directory {config.output.directory}")
    try:
        result = body(config, out)
    except QBMError as e:
        out.write_manifest(config, name, seed, error=format_error_response(e, name))
        raise
    out.write_manifest(config, name, seed)
    return result


def emit(out, config, name, report):
    """Write a JSON report when enabled and echo it."""
    if 'json' in config.output.formats:
        out.write_json(name, report)
    click.echo(f"{name}: written to {config.output.directory}")


def table(out, config, name, header, rows):
    if 'csv' in config.output.formats:
        out.write_csv(name, header, rows)
