import csv
import hashlib
import json
import logging
import os
import platform
from importlib.metadata import version

import numpy as np
import scipy

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
MANIFEST_FILE = 'manifest.json'


def configure_logging(directory: str, verbose: bool = False):
    """Log to <directory>/logs/run.log and stderr."""
    logs_dir = os.path.join(directory, 'logs')
    os.makedirs(logs_dir, exist_ok=True)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=[
            logging.FileHandler(os.path.join(logs_dir, 'run.log')),
            logging.StreamHandler(),
        ],
        force=True,
    )


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else None
    return value


def dumps(data) -> str:
    """Canonical JSON: sorted keys, two-space indent, non-finite floats as null."""
    return json.dumps(_plain(data), indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def config_hash(config) -> str:
    canonical = json.dumps(_plain(config.to_dict()), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def versions() -> dict:
    from qbmft import __version__
    return {
        'qbmft': __version__,
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'click': version('click'),
        'python': platform.python_version(),
    }


class OutputService:
    """Writes the CSV/JSON products of one run plus its manifest"""

    def __init__(self, directory: str):
        self.directory = directory
        self.files = []
        os.makedirs(directory, exist_ok=True)

    def _path(self, name):
        self.files.append(name)
        return os.path.join(self.directory, name)

    def write_json(self, name, data):
        path = self._path(name)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(dumps(data))
        logger.info(f"Wrote {path}")
        return path

    def write_csv(self, name, header, rows):
        """Header row plus rows; floats in shortest round-trip form."""
        path = self._path(name)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                                 for v in row])
        logger.info(f"Wrote {path}")
        return path

    def write_manifest(self, config, subcommand, seed=None, error=None):
        """
        Record what produced this directory

        Args:
            config: ExperimentConfig used for the run
            subcommand: subcommand name
            seed: random seed when the run was stochastic
            error: error body from format_error_response on failure

        Returns:
            Path of the manifest
        """
        manifest = {
            'subcommand': subcommand,
            'config': config.to_dict(),
            'config_hash': config_hash(config),
            'seed': seed,
            'versions': versions(),
            'files': sorted(set(self.files)),
        }
        if error is not None:
            manifest['error'] = error
        path = os.path.join(self.directory, MANIFEST_FILE)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(dumps(manifest))
        return path
