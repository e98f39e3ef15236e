import json
import logging
import os

from qbmft.models.experiment_config import ExperimentConfig
from qbmft.utils.error_handling import ConfigError

logger = logging.getLogger(__name__)


class ConfigService:
    """Service for loading, overriding and saving experiment configuration"""

    ENV_OUTPUT_DIR = 'QBMFT_OUTPUT_DIR'
    ENV_THREADS = 'QBMFT_THREADS'

    @staticmethod
    def get_config(path=None, environ=None):
        """
        Load an experiment configuration

        Args:
            path: JSON config file; None gives the documented defaults
            environ: environment mapping (defaults to os.environ)

        Returns:
            ExperimentConfig
        """
        data = {}
        if path is not None:
            if not os.path.exists(path):
                raise ConfigError(f"config file not found: {path}", field_errors=[f"{path}: missing"])
            try:
                with open(path, 'r', encoding='utf-8') as f:
                    data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config file is not valid JSON: {e}",
                                  field_errors=[f"line {e.lineno}, column {e.colno}: {e.msg}"])
        data = ConfigService.apply_overrides(data, os.environ if environ is None else environ)
        config = ExperimentConfig.from_dict(data)
        logger.info(f"Loaded configuration from {path or 'defaults'}")
        return config

    @staticmethod
    def apply_overrides(data, environ):
        """Environment overrides for the output directory and thread count only"""
        if not isinstance(data, dict):
            return data
        data = {key: dict(value) if isinstance(value, dict) else value for key, value in data.items()}
        output_dir = environ.get(ConfigService.ENV_OUTPUT_DIR)
        if output_dir:
            data.setdefault('output', {})['directory'] = output_dir
        threads = environ.get(ConfigService.ENV_THREADS)
        if threads:
            try:
                data.setdefault('mc', {})['threads'] = int(threads)
            except ValueError:
                raise ConfigError(f"{ConfigService.ENV_THREADS} must be an integer",
                                  field_errors=[f"{ConfigService.ENV_THREADS}={threads!r}: expected an integer"])
        return data

    @staticmethod
    def save_config(config, path):
        """Save configuration"""
        try:
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(config.to_dict(), f, indent=2, sort_keys=True)
                f.write('\n')
            return True
        except OSError as e:
            logger.error(f"Error saving config: {e}")
            return False
